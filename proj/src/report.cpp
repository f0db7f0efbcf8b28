#include "flowforge/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace flowforge {

namespace {

void check_schema(const nlohmann::json& report) {
    if (!report.is_object() || !report.contains("schema") || !report.contains("per_class")) {
        throw std::runtime_error("not a cost profile report (missing schema/per_class)");
    }
    const int schema = report["schema"].get<int>();
    if (schema != 1) {
        throw std::runtime_error("unsupported report schema " + std::to_string(schema));
    }
}

uint64_t series_max(const nlohmann::json& series) {
    uint64_t best = 0;
    if (series.is_array()) {
        for (const auto& v : series) {
            best = std::max(best, v.get<uint64_t>());
        }
    }
    return best;
}

std::string fmt_num(double v, int precision = 1) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << v;
    return os.str();
}

// Minimal polyline chart writer. Enough for the three report plots; not a
// general plotting library.
class SvgChart {
public:
    SvgChart(std::string title, std::string x_label, std::string y_label, bool log_x)
        : title_(std::move(title)),
          x_label_(std::move(x_label)),
          y_label_(std::move(y_label)),
          log_x_(log_x) {}

    void add_series(const std::string& name, std::vector<double> xs, std::vector<double> ys) {
        for (double x : xs) {
            min_x_ = std::min(min_x_, x);
            max_x_ = std::max(max_x_, x);
        }
        for (double y : ys) {
            min_y_ = std::min(min_y_, y);
            max_y_ = std::max(max_y_, y);
        }
        series_.push_back({name, std::move(xs), std::move(ys)});
    }

    std::string render() const {
        std::ostringstream svg;
        svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\""
            << kH << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n"
            << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n"
            << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" "
            << "font-family=\"sans-serif\" font-size=\"16\">" << title_ << "</text>\n";

        // Plot frame.
        svg << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << plot_w()
            << "\" height=\"" << plot_h()
            << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";

        draw_axes(svg);
        const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
        size_t color = 0;
        for (const auto& s : series_) {
            const char* stroke = palette[color % (sizeof(palette) / sizeof(palette[0]))];
            svg << "<polyline fill=\"none\" stroke=\"" << stroke
                << "\" stroke-width=\"1.5\" points=\"";
            for (size_t i = 0; i < s.xs.size(); ++i) {
                svg << fmt_num(px(s.xs[i]), 1) << "," << fmt_num(py(s.ys[i]), 1) << " ";
            }
            svg << "\"/>\n";
            // Legend entry.
            const double ly = kT + 16.0 + 18.0 * static_cast<double>(color);
            svg << "<line x1=\"" << kL + plot_w() + 8 << "\" y1=\"" << ly << "\" x2=\""
                << kL + plot_w() + 28 << "\" y2=\"" << ly << "\" stroke=\"" << stroke
                << "\" stroke-width=\"2\"/>\n"
                << "<text x=\"" << kL + plot_w() + 32 << "\" y=\"" << ly + 4
                << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.name
                << "</text>\n";
            ++color;
        }
        svg << "</svg>\n";
        return svg.str();
    }

private:
    struct Series {
        std::string name;
        std::vector<double> xs, ys;
    };

    static constexpr double kW = 760, kH = 420;
    static constexpr double kL = 70, kR = 190, kT = 46, kB = 52;

    double plot_w() const { return kW - kL - kR; }
    double plot_h() const { return kH - kT - kB; }

    double x_span() const {
        const double lo = log_x_ ? std::log10(std::max(min_x_, 1.0)) : min_x_;
        const double hi = log_x_ ? std::log10(std::max(max_x_, 10.0)) : max_x_;
        return std::max(hi - lo, 1e-9);
    }

    double px(double x) const {
        const double lo = log_x_ ? std::log10(std::max(min_x_, 1.0)) : min_x_;
        const double v = log_x_ ? std::log10(std::max(x, 1.0)) : x;
        return kL + (v - lo) / x_span() * plot_w();
    }

    double py(double y) const {
        const double span = std::max(max_y_ - std::min(min_y_, 0.0), 1e-9);
        return kT + plot_h() - (y - std::min(min_y_, 0.0)) / span * plot_h();
    }

    void draw_axes(std::ostringstream& svg) const {
        // X ticks: powers of ten when log, quarters otherwise.
        std::vector<double> xticks;
        if (log_x_) {
            const int lo = static_cast<int>(std::floor(std::log10(std::max(min_x_, 1.0))));
            const int hi = static_cast<int>(std::ceil(std::log10(std::max(max_x_, 10.0))));
            for (int e = lo; e <= hi; ++e) {
                xticks.push_back(std::pow(10.0, e));
            }
        } else {
            for (int i = 0; i <= 4; ++i) {
                xticks.push_back(min_x_ + (max_x_ - min_x_) * i / 4.0);
            }
        }
        for (double t : xticks) {
            const double x = px(t);
            svg << "<line x1=\"" << x << "\" y1=\"" << kT + plot_h() << "\" x2=\"" << x
                << "\" y2=\"" << kT + plot_h() + 5 << "\" stroke=\"#444\"/>\n"
                << "<text x=\"" << x << "\" y=\"" << kT + plot_h() + 18
                << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
                << fmt_num(t, t < 10 && !log_x_ ? 1 : 0) << "</text>\n";
        }
        for (int i = 0; i <= 4; ++i) {
            const double v = std::min(min_y_, 0.0) +
                             (max_y_ - std::min(min_y_, 0.0)) * i / 4.0;
            const double y = py(v);
            svg << "<line x1=\"" << kL - 5 << "\" y1=\"" << y << "\" x2=\"" << kL
                << "\" y2=\"" << y << "\" stroke=\"#444\"/>\n"
                << "<text x=\"" << kL - 8 << "\" y=\"" << y + 3
                << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
                << fmt_num(v, v < 10 ? 1 : 0) << "</text>\n";
        }
        svg << "<text x=\"" << kL + plot_w() / 2 << "\" y=\"" << kH - 12
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
            << x_label_ << "</text>\n"
            << "<text x=\"16\" y=\"" << kT + plot_h() / 2
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
            << "transform=\"rotate(-90 16 " << kT + plot_h() / 2 << ")\">" << y_label_
            << "</text>\n";
    }

    std::string title_, x_label_, y_label_;
    bool log_x_;
    std::vector<Series> series_;
    double min_x_ = std::numeric_limits<double>::max();
    double max_x_ = std::numeric_limits<double>::lowest();
    double min_y_ = std::numeric_limits<double>::max();
    double max_y_ = std::numeric_limits<double>::lowest();
};

}  // namespace

std::string render_report_table(const nlohmann::json& report) {
    check_schema(report);
    std::ostringstream out;
    out << "cost profile (" << report.value("mode", "?") << "): "
        << report.value("trace", "?") << "\n"
        << "config " << report.value("config_hash", "?") << ", "
        << report["cycle_end_ns"].size() << " cycles\n";
    const auto& timer = report["timer"];
    out << "timer: resolution " << timer["resolution_ns"].get<uint64_t>()
        << " ns, empty-section overhead " << fmt_num(timer["overhead_ns"].get<double>())
        << " ns (reported, not subtracted)";
    if (timer["coarse_warning"].get<bool>()) {
        out << "  [WARNING: coarse timer]";
    }
    out << "\n\n";

    out << std::left << std::setw(28) << "class" << std::right << std::setw(10) << "calls"
        << std::setw(10) << "mean ns" << std::setw(10) << "median" << std::setw(10)
        << "p99" << std::setw(11) << "max" << std::setw(13) << "state peak" << std::setw(14)
        << "storage B" << "\n";
    out << std::string(106, '-') << "\n";
    for (const auto& [name, cls] : report["per_class"].items()) {
        const auto& t = cls["add_packet_ns"];
        out << std::left << std::setw(28) << name << std::right << std::setw(10)
            << t["count"].get<uint64_t>() << std::setw(10)
            << fmt_num(t["mean"].get<double>()) << std::setw(10)
            << t["median"].get<uint64_t>() << std::setw(10) << t["p99"].get<uint64_t>()
            << std::setw(11) << t["max"].get<uint64_t>() << std::setw(13)
            << series_max(cls["state_bytes_per_cycle"]) << std::setw(14)
            << cls["storage_total_bytes"].get<uint64_t>() << "\n";
    }
    out << std::string(106, '-') << "\n";
    out << "output total " << report["output_total_bytes"].get<uint64_t>()
        << " B, framing " << report["framing_total_bytes"].get<uint64_t>() << " B\n";
    return out.str();
}

std::vector<std::string> render_report_plots(const nlohmann::json& report,
                                             const std::string& out_dir) {
    check_schema(report);
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<std::string> written;

    auto save = [&](const std::string& name, const std::string& svg) {
        const fs::path path = fs::path(out_dir) / name;
        std::ofstream f(path, std::ios::trunc);
        if (!f) {
            throw std::runtime_error("cannot write " + path.string());
        }
        f << svg;
        written.push_back(path.string());
    };

    SvgChart cdf("add_packet duration CDF", "ns (log scale)", "quantile", true);
    SvgChart state("state bytes per collection cycle", "cycle", "bytes", false);
    SvgChart storage("storage bytes per collection cycle", "cycle", "bytes", false);
    bool have_series = false;

    for (const auto& [name, cls] : report["per_class"].items()) {
        const auto& quant = cls["add_packet_ns"]["quantiles"];
        if (quant.is_array() && cls["add_packet_ns"]["count"].get<uint64_t>() > 0) {
            std::vector<double> xs, ys;
            for (size_t i = 0; i < quant.size(); ++i) {
                xs.push_back(std::max(quant[i].get<double>(), 1.0));
                ys.push_back(static_cast<double>(i) /
                             static_cast<double>(quant.size() - 1));
            }
            cdf.add_series(name, std::move(xs), std::move(ys));
        }
        auto series_of = [](const nlohmann::json& arr) {
            std::vector<double> xs, ys;
            for (size_t i = 0; i < arr.size(); ++i) {
                xs.push_back(static_cast<double>(i + 1));
                ys.push_back(arr[i].get<double>());
            }
            return std::pair(std::move(xs), std::move(ys));
        };
        if (!cls["state_bytes_per_cycle"].empty()) {
            auto [xs, ys] = series_of(cls["state_bytes_per_cycle"]);
            state.add_series(name, std::move(xs), std::move(ys));
            have_series = true;
        }
        if (!cls["storage_bytes_per_cycle"].empty()) {
            auto [xs, ys] = series_of(cls["storage_bytes_per_cycle"]);
            storage.add_series(name, std::move(xs), std::move(ys));
        }
    }

    save("add-packet-cdf.svg", cdf.render());
    if (have_series) {
        save("state-series.svg", state.render());
        save("storage-series.svg", storage.render());
    }
    return written;
}

std::string diff_reports(const nlohmann::json& before, const nlohmann::json& after) {
    check_schema(before);
    check_schema(after);
    const std::string hash_a = before.value("config_hash", "");
    const std::string hash_b = after.value("config_hash", "");
    if (hash_a != hash_b) {
        throw std::runtime_error(
            "refusing to diff: reports were produced under different configs (" + hash_a +
            " vs " + hash_b + ")");
    }

    std::ostringstream out;
    out << "cost profile diff, config " << hash_a << "\n"
        << "  before: " << before.value("trace", "?") << "\n"
        << "  after:  " << after.value("trace", "?") << "\n\n";
    out << std::left << std::setw(28) << "class" << std::right << std::setw(12)
        << "median ns" << std::setw(12) << "after" << std::setw(9) << "ratio"
        << std::setw(14) << "storage B" << std::setw(14) << "after" << std::setw(9)
        << "ratio" << "\n";
    out << std::string(98, '-') << "\n";
    for (const auto& [name, cls_a] : before["per_class"].items()) {
        if (!after["per_class"].contains(name)) {
            continue;
        }
        const auto& cls_b = after["per_class"][name];
        const double med_a = cls_a["add_packet_ns"]["median"].get<double>();
        const double med_b = cls_b["add_packet_ns"]["median"].get<double>();
        const double sto_a = cls_a["storage_total_bytes"].get<double>();
        const double sto_b = cls_b["storage_total_bytes"].get<double>();
        auto ratio = [](double a, double b) { return a > 0 ? b / a : 0.0; };
        out << std::left << std::setw(28) << name << std::right << std::setw(12)
            << fmt_num(med_a) << std::setw(12) << fmt_num(med_b) << std::setw(9)
            << fmt_num(ratio(med_a, med_b), 2) << std::setw(14) << fmt_num(sto_a, 0)
            << std::setw(14) << fmt_num(sto_b, 0) << std::setw(9)
            << fmt_num(ratio(sto_a, sto_b), 2) << "\n";
    }
    return out.str();
}

}  // namespace flowforge
