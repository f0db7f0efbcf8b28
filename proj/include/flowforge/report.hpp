#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace flowforge {

// Renderers for cost-profile report files (the JSON written by the profile
// subcommand). All of them validate the schema field and throw
// std::runtime_error with an explanation when the document is not a report.

// Human-readable summary table covering all three cost axes per class.
std::string render_report_table(const nlohmann::json& report);

// Static SVG plots: add_packet CDF (log-scale ns), state-per-cycle series,
// storage-per-cycle series. Writes into out_dir and returns the paths.
std::vector<std::string> render_report_plots(const nlohmann::json& report,
                                             const std::string& out_dir);

// Side-by-side comparison of two reports. Refuses (throws) when the reports
// were produced under different config hashes, since cost numbers are only
// comparable for identical configurations.
std::string diff_reports(const nlohmann::json& before, const nlohmann::json& after);

}  // namespace flowforge
