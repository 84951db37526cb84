#include "ail/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace ail::io {

std::string fmt_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json graph_to_json(const symbolic::TransitionGraph& graph) {
  json j;
  j["vertices"] = graph.vertices();
  j["edges"] = json::array();
  for (const auto& e : graph.edges())
    j["edges"].push_back({{"id", e.id}, {"src", e.src}, {"dst", e.dst}});
  return j;
}

symbolic::TransitionGraph graph_from_json(const json& j) {
  if (!j.contains("vertices") || !j.contains("edges"))
    throw Error("graph json needs vertices and edges");
  std::vector<int> vertices = j.at("vertices").get<std::vector<int>>();
  std::vector<symbolic::Edge> edges;
  for (const auto& e : j.at("edges")) {
    edges.push_back({e.at("id").get<int>(), e.at("src").get<int>(),
                     e.at("dst").get<int>()});
  }
  return symbolic::TransitionGraph(std::move(vertices), std::move(edges));
}

json code_to_json(const symbolic::Code& code) {
  json j;
  j["type"] =
      code.kind == symbolic::Code::Kind::periodic ? "periodic" : "window";
  j["edges"] = code.edges;
  return j;
}

symbolic::Code code_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  auto edges = j.at("edges").get<std::vector<int>>();
  if (type == "periodic") return symbolic::Code::periodic(std::move(edges));
  if (type == "window") return symbolic::Code::window(std::move(edges));
  throw Error("unknown code type: " + type);
}

json standard_code_to_json(const symbolic::StandardCode& code) {
  json j;
  j["multiples"] = code.multiples;
  j["periodic"] = code.periodic;
  if (!code.periodic) j["first_index"] = code.first_index;
  if (!std::isnan(code.bound)) j["bound"] = code.bound;
  return j;
}

symbolic::StandardCode standard_code_from_json(const json& j) {
  symbolic::StandardCode code;
  code.multiples = j.at("multiples").get<std::vector<long long>>();
  if (j.contains("periodic")) code.periodic = j.at("periodic").get<bool>();
  if (j.contains("first_index"))
    code.first_index = j.at("first_index").get<long long>();
  if (j.contains("bound")) code.bound = j.at("bound").get<double>();
  return code;
}

std::string orbit_to_csv(const dls::Orbit& orbit,
                         const std::vector<double>& local_residuals) {
  std::ostringstream out;
  const auto m = orbit.points.empty() ? 0 : orbit.points.front().size();
  out << "index";
  for (Eigen::Index c = 0; c < m; ++c) out << ",x_" << c;
  out << ",local_residual\n";
  for (std::size_t i = 0; i < orbit.points.size(); ++i) {
    out << i;
    for (Eigen::Index c = 0; c < m; ++c)
      out << ',' << fmt_double(orbit.points[i](c));
    out << ','
        << fmt_double(i < local_residuals.size()
                          ? local_residuals[i]
                          : std::numeric_limits<double>::quiet_NaN());
    out << '\n';
  }
  return out.str();
}

json shadow_report_json(const dls::Orbit& orbit) {
  json j;
  j["rho"] = orbit.rho;
  j["residual"] = orbit.residual;
  j["iterations"] = orbit.iterations;
  j["contraction_estimate"] = orbit.contraction_estimate;
  j["converged"] = orbit.converged;
  return j;
}

json cone_report_json(const hyperbolicity::ConeReport& report) {
  json j;
  j["pass"] = report.pass;
  j["tier"] = report.tier;
  if (std::isinf(report.mu_measured)) {
    j["mu"] = "infinity";
    j["log_mu"] = "infinity";
  } else {
    j["mu"] = report.mu_measured;
    j["log_mu"] = report.log_mu;
  }
  j["worst_index"] = report.worst_index;
  return j;
}

json entropy_report_json(const entropy::SmBound& bound) {
  json j;
  j["lambda"] = bound.lambda;
  j["sigma"] = bound.sigma;
  j["Lambda_star"] = bound.Lambda_star;
  j["q"] = bound.q;
  j["bound_nats"] = bound.bound_nats;
  return j;
}

json parse_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& err) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min(err.byte, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream msg;
    msg << "parse error in " << path << " at line " << line << " column "
        << col << ": " << err.what();
    throw Error(msg.str());
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << content;
}

}  // namespace ail::io
