#pragma once

#include <string>

#include "json.hpp"

#include "ail/dls.hpp"
#include "ail/entropy.hpp"
#include "ail/hyperbolicity.hpp"
#include "ail/symbolic.hpp"

namespace ail::io {

using nlohmann::json;

// Formats with full round-trip precision; NaN prints as "nan".
std::string fmt_double(double x);

json graph_to_json(const symbolic::TransitionGraph& graph);
symbolic::TransitionGraph graph_from_json(const json& j);

json code_to_json(const symbolic::Code& code);
symbolic::Code code_from_json(const json& j);

json standard_code_to_json(const symbolic::StandardCode& code);
symbolic::StandardCode standard_code_from_json(const json& j);

std::string orbit_to_csv(const dls::Orbit& orbit,
                         const std::vector<double>& local_residuals);

json shadow_report_json(const dls::Orbit& orbit);
json cone_report_json(const hyperbolicity::ConeReport& report);
json entropy_report_json(const entropy::SmBound& bound);

// Parses a JSON file, reporting failures with line and column.
json parse_json_file(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace ail::io
