#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ail/dls.hpp"
#include "ail/entropy.hpp"
#include "ail/hyperbolicity.hpp"
#include "ail/io.hpp"
#include "ail/models.hpp"
#include "ail/standard_map.hpp"
#include "ail/symbolic.hpp"

namespace {

namespace io = ail::io;
using ail::io::json;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct Options {
  std::string model = "standard";
  std::string code_path;
  double lambda = kNan;
  double sigma = kNan;
  double Lambda = kNan;
  double width = kNan;
  std::string out = ".";
  std::uint64_t seed = 0;
  std::string grid;
  double mu = 2.0;
  double alpha = 0.5;
  bool optimize = false;
  bool dump_graph = false;
  std::string config_path;
};

struct ModelHandle {
  enum class Kind { standard, kick, billiard, sepmap } kind = Kind::standard;
  ail::models::KickSystem kick;
  ail::models::StripSystem strip;
  ail::models::SepSystem sep;

  const ail::dls::DlsSystem& dls() const {
    switch (kind) {
      case Kind::kick:
        return kick.system;
      case Kind::billiard:
        return strip.system;
      default:
        return sep.system;
    }
  }
};

bool looks_like_file(const std::string& model) {
  return model.size() > 5 && model.rfind(".json") == model.size() - 5;
}

ail::models::Potential potential_from_json(const json& j,
                                           const std::string& fallback) {
  if (j.is_string()) return ail::models::builtin_potential(j.get<std::string>());
  return ail::models::builtin_potential(fallback);
}

ail::models::WallProfile wall_from_json(const json& j) {
  const std::string type = j.value("type", "cosine");
  std::vector<double> seeds =
      j.value("seeds", std::vector<double>{0.0, 0.5});
  if (type == "cosine")
    return ail::models::cosine_wall(j.value("amplitude", 0.1), seeds);
  if (type == "flat") return ail::models::flat_wall(seeds);
  if (type == "spline")
    return ail::models::spline_wall(j.at("samples").get<std::vector<double>>(),
                                    seeds);
  throw ail::Error("unknown wall type: " + type);
}

ModelHandle build_model(const Options& opt) {
  ModelHandle handle;
  if (opt.model == "standard") {
    handle.kind = ModelHandle::Kind::standard;
    return handle;
  }
  if (!looks_like_file(opt.model))
    throw ail::Error("unknown model: " + opt.model);
  const json j = io::parse_json_file(opt.model);
  const std::string name = j.value("model", "");
  if (name == "kick") {
    auto spec = ail::models::KickMapSpec::scalar(
        j.value("eps2", 0.01), potential_from_json(j.value("potential", json()), "cos"),
        j.value("lattice", 1.0), j.value("seeds", std::vector<double>{}));
    spec.shifts = j.value("shifts", 3);
    if (j.contains("pair_distance"))
      spec.pair_distance = j.at("pair_distance").get<double>();
    handle.kind = ModelHandle::Kind::kick;
    handle.kick = ail::models::make_kick_map(spec);
    return handle;
  }
  if (name == "billiard") {
    ail::models::StripBilliardSpec spec;
    spec.lower = wall_from_json(j.value("lower", json::object()));
    spec.upper = wall_from_json(j.value("upper", json::object()));
    spec.width = j.value("width", 50.0);
    if (!std::isnan(opt.width)) spec.width = opt.width;
    spec.shifts = j.value("shifts", 3);
    if (j.contains("pair_distance"))
      spec.pair_distance = j.at("pair_distance").get<double>();
    spec.certify = j.value("certify", true);
    handle.kind = ModelHandle::Kind::billiard;
    handle.strip = ail::models::make_strip_billiard(spec);
    return handle;
  }
  if (name == "sepmap") {
    ail::models::SepMapSpec spec;
    spec.lambda_s = j.value("lambda_s", 1.0);
    if (j.contains("omega_hat")) {
      const auto oh = j.at("omega_hat").get<std::vector<double>>();
      if (oh.size() != 2) throw ail::Error("omega_hat needs two entries");
      spec.omega_hat = {oh[0], oh[1]};
    }
    spec.V[0] = potential_from_json(j.value("potential", json()), "neg_cos");
    spec.V[1] = spec.V[0];
    spec.c1 = j.value("c1", 10.0);
    if (j.contains("c2")) spec.c2 = j.at("c2").get<double>();
    spec.seeds[0] = j.value("seeds", std::vector<double>{0.0, 0.5});
    spec.seeds[1] = spec.seeds[0];
    spec.drop_coupling = j.value("drop_coupling", false);
    handle.kind = ModelHandle::Kind::sepmap;
    handle.sep = ail::models::make_sepmap(spec);
    return handle;
  }
  throw ail::Error("unknown model: " + name);
}

ail::smap::Params smap_params(const Options& opt) {
  ail::smap::Params params;
  if (std::isnan(opt.lambda)) throw ail::Error("lambda required");
  params.coupling = opt.lambda;
  params.sigma = std::isnan(opt.sigma) ? std::numbers::pi / 4.0 : opt.sigma;
  params.Lambda = std::isnan(opt.Lambda) ? 0.0 : opt.Lambda;
  return params;
}

std::string smap_orbit_csv(const ail::smap::Orbit& orbit, double coupling) {
  ail::dls::Orbit wrapped;
  wrapped.points.reserve(orbit.points.size());
  for (double x : orbit.points) {
    ail::dls::Vec v(1);
    v(0) = x;
    wrapped.points.push_back(v);
  }
  const std::size_t n = orbit.points.size();
  std::vector<double> locals(n, kNan);
  const std::size_t lo = orbit.code.periodic ? 0 : 1;
  const std::size_t hi = orbit.code.periodic ? n : (n > 0 ? n - 1 : 0);
  for (std::size_t k = lo; k < hi; ++k) {
    const double prev = orbit.points[(k + n - 1) % n];
    const double next = orbit.points[(k + 1) % n];
    locals[k] = std::abs(next - 2.0 * orbit.points[k] + prev -
                         coupling * std::sin(orbit.points[k]));
  }
  return io::orbit_to_csv(wrapped, locals);
}

json smap_report(const ail::smap::Orbit& orbit) {
  json j;
  j["rho"] = orbit.rho;
  j["residual"] = orbit.residual;
  j["iterations"] = orbit.iterations;
  j["contraction_estimate"] = orbit.contraction_estimate;
  j["converged"] = orbit.converged;
  return j;
}

void write_json(const std::string& path, const json& j) {
  io::write_text_file(path, j.dump(2) + "\n");
}

void ensure_out(const Options& opt) {
  std::filesystem::create_directories(opt.out);
}

void maybe_dump_graph(const Options& opt, const ModelHandle& handle) {
  if (!opt.dump_graph || handle.kind == ModelHandle::Kind::standard) return;
  write_json(opt.out + "/graph.json", io::graph_to_json(handle.dls().graph()));
}

int cmd_shadow(const Options& opt) {
  ensure_out(opt);
  const ModelHandle handle = build_model(opt);
  if (opt.code_path.empty()) throw ail::Error("code file required");
  if (!std::filesystem::exists(opt.code_path))
    throw ail::Error("code file not found: " + opt.code_path);
  const json code_json = io::parse_json_file(opt.code_path);
  maybe_dump_graph(opt, handle);

  if (handle.kind == ModelHandle::Kind::standard) {
    const auto code = io::standard_code_from_json(code_json);
    const auto orbit = ail::smap::shadow_code(code, smap_params(opt));
    io::write_text_file(opt.out + "/orbit.csv",
                        smap_orbit_csv(orbit, opt.lambda));
    write_json(opt.out + "/report.json", smap_report(orbit));
    return 0;
  }
  const auto code = io::code_from_json(code_json);
  ail::dls::ShadowConfig cfg;
  cfg.sigma = opt.sigma;
  const auto orbit = ail::dls::shadow(handle.dls(), code, cfg);
  io::write_text_file(
      opt.out + "/orbit.csv",
      io::orbit_to_csv(orbit, ail::dls::local_residuals(handle.dls(), orbit)));
  write_json(opt.out + "/report.json", io::shadow_report_json(orbit));
  return 0;
}

int cmd_verify(const Options& opt) {
  ensure_out(opt);
  const ModelHandle handle = build_model(opt);
  if (opt.code_path.empty()) throw ail::Error("code file required");
  if (!std::filesystem::exists(opt.code_path))
    throw ail::Error("code file not found: " + opt.code_path);
  const json code_json = io::parse_json_file(opt.code_path);
  maybe_dump_graph(opt, handle);

  const ail::hyperbolicity::ConeParams cones{opt.alpha, opt.alpha, opt.mu};
  json report;
  ail::hyperbolicity::ConeReport cone;
  if (handle.kind == ModelHandle::Kind::standard) {
    const auto code = io::standard_code_from_json(code_json);
    const auto orbit = ail::smap::shadow_code(code, smap_params(opt));
    cone = ail::hyperbolicity::cone_verify(
        ail::hyperbolicity::variational_blocks(orbit, opt.lambda), cones);
    report = io::cone_report_json(cone);
    report["residual"] = orbit.residual;
    report["rho"] = orbit.rho;
  } else {
    const auto code = io::code_from_json(code_json);
    ail::dls::ShadowConfig cfg;
    cfg.sigma = opt.sigma;
    const auto orbit = ail::dls::shadow(handle.dls(), code, cfg);
    cone = ail::hyperbolicity::cone_verify(
        ail::hyperbolicity::variational_blocks(handle.dls(), orbit), cones);
    report = io::cone_report_json(cone);
    report["residual"] = orbit.residual;
    report["rho"] = orbit.rho;
  }
  if (!cone.pass) {
    report["status"] = "certification failure";
    write_json(opt.out + "/report.json", report);
    std::cerr << "certification failure: cone criterion not satisfied\n";
    return 2;
  }
  write_json(opt.out + "/report.json", report);
  return 0;
}

int cmd_entropy(const Options& opt) {
  ensure_out(opt);
  json j;
  if (opt.model == "standard") {
    if (std::isnan(opt.lambda)) throw ail::Error("lambda required");
    const auto bound =
        opt.optimize
            ? ail::entropy::optimize_entropy_bound(opt.lambda)
            : ail::entropy::standard_map_entropy_bound(
                  opt.lambda, std::isnan(opt.sigma) ? std::numbers::pi / 4.0
                                                    : opt.sigma);
    j = io::entropy_report_json(bound);
  } else {
    const ModelHandle handle = build_model(opt);
    maybe_dump_graph(opt, handle);
    const auto res = ail::entropy::tmc_entropy(handle.dls().graph());
    j["entropy"] = res.entropy;
    j["spectral_radius"] = res.spectral_radius;
    j["core_vertices"] = res.core_vertices;
    j["no_recurrent_part"] = res.no_recurrent_part;
  }
  std::cout << j.dump(2) << '\n';
  write_json(opt.out + "/entropy.json", j);
  return 0;
}

struct GridSpec {
  double start = 0.0, stop = 0.0, step = 0.0;
};

GridSpec parse_grid(const std::string& text) {
  GridSpec g;
  if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &g.start, &g.stop, &g.step) !=
          3 ||
      !(g.step > 0.0) || g.stop < g.start)
    throw ail::Error("bad grid specification: " + text);
  return g;
}

int cmd_sweep(const Options& opt) {
  ensure_out(opt);
  if (opt.grid.empty()) throw ail::Error("grid required");
  const GridSpec grid = parse_grid(opt.grid);
  if (opt.code_path.empty()) throw ail::Error("code file required");
  if (!std::filesystem::exists(opt.code_path))
    throw ail::Error("code file not found: " + opt.code_path);
  const json code_json = io::parse_json_file(opt.code_path);
  const ail::hyperbolicity::ConeParams cones{opt.alpha, opt.alpha, opt.mu};

  json model_json;
  std::string model_name = opt.model;
  if (opt.model != "standard") {
    if (!looks_like_file(opt.model))
      throw ail::Error("unknown model: " + opt.model);
    model_json = io::parse_json_file(opt.model);
    model_name = model_json.value("model", "");
    if (model_name == "sepmap")
      throw ail::Error("sweep not supported for this model");
    if (model_name != "kick" && model_name != "billiard")
      throw ail::Error("unknown model: " + model_name);
  }

  std::string csv = "param,converged,residual,rho,contraction,mu,entropy_bound\n";
  const double sigma =
      std::isnan(opt.sigma) ? std::numbers::pi / 4.0 : opt.sigma;
  for (double p = grid.start; p <= grid.stop + 1e-12 * grid.step;
       p += grid.step) {
    bool converged = false;
    double residual = kNan, rho = kNan, contraction = kNan, mu = kNan,
           bound = kNan;
    try {
      if (model_name == "standard") {
        const auto code = io::standard_code_from_json(code_json);
        ail::smap::Params params;
        params.coupling = p;
        params.sigma = sigma;
        params.Lambda = std::isnan(opt.Lambda) ? 0.0 : opt.Lambda;
        const auto orbit = ail::smap::shadow_code(code, params);
        converged = orbit.converged;
        residual = orbit.residual;
        rho = orbit.rho;
        contraction = orbit.contraction_estimate;
        mu = ail::hyperbolicity::cone_verify(
                 ail::hyperbolicity::variational_blocks(orbit, p), cones)
                 .mu_measured;
        try {
          bound = ail::entropy::standard_map_entropy_bound(p, sigma).bound_nats;
        } catch (const ail::Error&) {
        }
      } else {
        Options local = opt;
        if (model_name == "kick") {
          json mj = model_json;
          mj["eps2"] = p;
          const std::string tmp = opt.out + "/sweep_model.json";
          io::write_text_file(tmp, mj.dump(2) + "\n");
          local.model = tmp;
        } else {
          local.width = p;
        }
        const ModelHandle handle = build_model(local);
        const auto code = io::code_from_json(code_json);
        ail::dls::ShadowConfig cfg;
        cfg.sigma = opt.sigma;
        const auto orbit = ail::dls::shadow(handle.dls(), code, cfg);
        converged = orbit.converged;
        residual = orbit.residual;
        rho = orbit.rho;
        contraction = orbit.contraction_estimate;
        mu = ail::hyperbolicity::cone_verify(
                 ail::hyperbolicity::variational_blocks(handle.dls(), orbit),
                 cones)
                 .mu_measured;
      }
    } catch (const ail::CertificationError&) {
      converged = false;
      residual = rho = contraction = mu = bound = kNan;
    }
    csv += io::fmt_double(p);
    csv += converged ? ",true," : ",false,";
    csv += io::fmt_double(residual);
    csv += ',';
    csv += io::fmt_double(rho);
    csv += ',';
    csv += io::fmt_double(contraction);
    csv += ',';
    csv += io::fmt_double(mu);
    csv += ',';
    csv += io::fmt_double(bound);
    csv += '\n';
  }
  io::write_text_file(opt.out + "/sweep.csv", csv);
  return 0;
}

int cmd_validate(const Options& opt) {
  const json j = io::parse_json_file(opt.config_path);
  std::vector<std::string> diags;

  if (!j.contains("command")) {
    diags.push_back("missing command");
  } else {
    const std::string cmd = j.at("command").get<std::string>();
    if (cmd != "shadow" && cmd != "verify" && cmd != "entropy" &&
        cmd != "sweep")
      diags.push_back("unknown command: " + cmd);
  }
  if (j.contains("model")) {
    const std::string model = j.at("model").get<std::string>();
    if (model != "standard") {
      if (!looks_like_file(model))
        diags.push_back("unknown model: " + model);
      else if (!std::filesystem::exists(model))
        diags.push_back("model file not found: " + model);
    }
  }
  if (j.contains("code")) {
    const std::string code = j.at("code").get<std::string>();
    if (!std::filesystem::exists(code))
      diags.push_back("code file not found: " + code);
  }
  if (j.contains("sigma")) {
    const double sigma = j.at("sigma").get<double>();
    if (!(sigma > 0.0) || !(sigma < std::numbers::pi / 2.0))
      diags.push_back("sigma outside (0, pi/2)");
  }
  if (j.contains("lambda")) {
    if (j.at("lambda").get<double>() == 0.0)
      diags.push_back("lambda must be nonzero");
  }
  if (j.contains("grid")) {
    try {
      parse_grid(j.at("grid").get<std::string>());
    } catch (const ail::Error& err) {
      diags.emplace_back(err.what());
    }
  }
  for (const auto& d : diags) std::cout << d << '\n';
  return diags.empty() ? 0 : 1;
}

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--model", opt.model, "built-in name or model spec file");
  cmd->add_option("--code", opt.code_path, "code file");
  cmd->add_option("--lambda", opt.lambda, "coupling strength");
  cmd->add_option("--sigma", opt.sigma, "strip half-width");
  cmd->add_option("--Lambda", opt.Lambda, "second-difference bound");
  cmd->add_option("--width", opt.width, "strip width override");
  cmd->add_option("--out", opt.out, "output directory");
  cmd->add_option("--seed", opt.seed, "seed for randomized checks");
  cmd->add_option("--grid", opt.grid, "sweep grid start:stop:step");
  cmd->add_option("--mu", opt.mu, "required expansion factor");
  cmd->add_option("--alpha", opt.alpha, "cone aperture");
  cmd->add_flag("--optimize", opt.optimize, "optimize over sigma");
  cmd->add_flag("--dump-graph", opt.dump_graph, "write graph.json");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shadowing and certification for near-anti-integrable systems"};
  app.require_subcommand(1);
  Options opt;

  CLI::App* shadow = app.add_subcommand("shadow", "construct a coded orbit");
  CLI::App* verify = app.add_subcommand("verify", "certify hyperbolicity");
  CLI::App* entropy = app.add_subcommand("entropy", "entropy lower bound");
  CLI::App* sweep = app.add_subcommand("sweep", "parameter sweep");
  CLI::App* validate = app.add_subcommand("validate", "check a run config");
  for (CLI::App* cmd : {shadow, verify, entropy, sweep})
    add_common(cmd, opt);
  validate->add_option("config", opt.config_path, "run config file")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (shadow->parsed()) return cmd_shadow(opt);
    if (verify->parsed()) return cmd_verify(opt);
    if (entropy->parsed()) return cmd_entropy(opt);
    if (sweep->parsed()) return cmd_sweep(opt);
    return cmd_validate(opt);
  } catch (const ail::CertificationError& err) {
    try {
      std::filesystem::create_directories(opt.out);
      json j;
      j["status"] = "certification failure";
      j["error"] = err.what();
      io::write_text_file(opt.out + "/report.json", j.dump(2) + "\n");
    } catch (...) {
    }
    std::cerr << "certification failure: " << err.what() << '\n';
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
}
