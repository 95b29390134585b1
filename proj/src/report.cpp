#include "gsamp/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "gsamp/errors.hpp"

namespace gsamp {
namespace {

// Round-trippable decimal form of a double (17 significant digits).
std::string format_full(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

std::string format_short(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.4g", value);
    return buffer;
}

std::string strip_extension(const std::string& path) {
    const auto slash = path.find_last_of("/\\");
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path;
    return path.substr(0, dot);
}

void check_report(const MseReport& report) {
    const auto n = report.estimator_names.size();
    if (n == 0) throw validation_error("write_report: report holds no estimators");
    if (static_cast<std::size_t>(report.mse_mean.rows()) != n ||
        report.avg_mse.size() != n || report.diverged_trials.size() != n)
        throw validation_error("write_report: report field sizes are inconsistent");
    if (report.mse_mean.cols() < 1)
        throw validation_error("write_report: report holds no time steps");
}

std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot create output file " + path);
    return out;
}

// tab10 palette; estimators beyond ten cycle through it.
const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
constexpr int kPaletteSize = 10;

struct Ticks {
    std::vector<double> values;
    std::vector<std::string> labels;
};

Ticks linear_ticks(double lo, double hi, int count) {
    Ticks ticks;
    if (!(hi > lo)) hi = lo + 1.0;
    for (int i = 0; i < count; ++i) {
        const double v = lo + (hi - lo) * i / (count - 1);
        ticks.values.push_back(v);
        ticks.labels.push_back(format_short(v));
    }
    return ticks;
}

Ticks decade_ticks(double lo, double hi) {
    Ticks ticks;
    const int d_lo = static_cast<int>(std::floor(std::log10(lo) + 1e-12));
    const int d_hi = static_cast<int>(std::ceil(std::log10(hi) - 1e-12));
    int stride = 1;
    while ((d_hi - d_lo) / stride + 1 > 8) ++stride;
    for (int d = d_lo; d <= d_hi; d += stride) {
        ticks.values.push_back(std::pow(10.0, d));
        std::ostringstream label;
        label << "1e" << d;
        ticks.labels.push_back(label.str());
    }
    return ticks;
}

std::string escape_xml(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

void write_svg_chart(const MseReport& report, const std::string& svg_path, bool log_scale) {
    const int n_est = static_cast<int>(report.estimator_names.size());
    const int n_t = static_cast<int>(report.mse_mean.cols());

    constexpr double width = 960.0, height = 540.0;
    constexpr double left = 80.0, right = 930.0, top = 40.0, bottom = 480.0;

    double y_lo = report.mse_mean.minCoeff();
    double y_hi = report.mse_mean.maxCoeff();
    bool use_log = log_scale;
    double log_floor = 0.0;
    if (use_log) {
        double min_pos = 0.0;
        for (Eigen::Index i = 0; i < report.mse_mean.size(); ++i) {
            const double v = report.mse_mean(i / report.mse_mean.cols(),
                                             i % report.mse_mean.cols());
            if (v > 0.0 && (min_pos == 0.0 || v < min_pos)) min_pos = v;
        }
        if (min_pos == 0.0 || y_hi <= 0.0) {
            log_warning("write_report: no positive values; falling back to a linear ordinate");
            use_log = false;
        } else {
            log_floor = min_pos;
            y_lo = std::log10(min_pos);
            y_hi = std::log10(y_hi);
        }
    }
    if (!(y_hi > y_lo)) y_hi = y_lo + 1.0;

    const double x_lo = 1.0, x_hi = static_cast<double>(n_t);
    auto x_px = [&](double t) {
        return left + (right - left) * (t - x_lo) / std::max(x_hi - x_lo, 1.0);
    };
    auto y_px = [&](double v) {
        if (use_log) v = std::log10(std::max(v, log_floor));
        return bottom - (bottom - top) * (v - y_lo) / (y_hi - y_lo);
    };

    std::ofstream svg = open_for_write(svg_path);
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // Axes.
    svg << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\""
        << bottom << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
        << bottom << "\" stroke=\"black\"/>\n";

    // Ordinate ticks and grid lines.
    Ticks y_ticks;
    if (use_log) {
        y_ticks = decade_ticks(std::pow(10.0, y_lo), std::pow(10.0, y_hi));
    } else {
        y_ticks = linear_ticks(y_lo, y_hi, 6);
    }
    for (std::size_t i = 0; i < y_ticks.values.size(); ++i) {
        const double py = y_px(y_ticks.values[i]);
        if (py < top - 1.0 || py > bottom + 1.0) continue;
        svg << "<line x1=\"" << left << "\" y1=\"" << py << "\" x2=\"" << right << "\" y2=\""
            << py << "\" stroke=\"#dddddd\"/>\n";
        svg << "<text x=\"" << left - 8.0 << "\" y=\"" << py + 4.0
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">"
            << escape_xml(y_ticks.labels[i]) << "</text>\n";
    }

    // Abscissa ticks.
    const int n_x_ticks = std::min(6, n_t);
    for (int i = 0; i < n_x_ticks; ++i) {
        const double t = (n_x_ticks == 1)
                             ? x_lo
                             : x_lo + (x_hi - x_lo) * i / (n_x_ticks - 1);
        const double tick = std::round(t);
        const double px = x_px(tick);
        svg << "<line x1=\"" << px << "\" y1=\"" << bottom << "\" x2=\"" << px << "\" y2=\""
            << bottom + 5.0 << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << px << "\" y=\"" << bottom + 20.0
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
            << static_cast<long long>(tick) << "</text>\n";
    }

    // Axis labels.
    svg << "<text x=\"" << (left + right) / 2.0 << "\" y=\"" << bottom + 42.0
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">time step t"
           "</text>\n";
    svg << "<text x=\"20\" y=\"" << (top + bottom) / 2.0
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
           "transform=\"rotate(-90 20 "
        << (top + bottom) / 2.0 << ")\">" << (use_log ? "mean MSE (log scale)" : "mean MSE")
        << "</text>\n";

    // One polyline per estimator.
    for (int e = 0; e < n_est; ++e) {
        const char* color = kPalette[e % kPaletteSize];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (int t = 0; t < n_t; ++t) {
            if (t > 0) svg << ' ';
            svg << x_px(static_cast<double>(t + 1)) << ',' << y_px(report.mse_mean(e, t));
        }
        svg << "\"/>\n";
    }

    // Legend (top-right corner, inside the plot frame).
    const double legend_x = right - 220.0;
    double legend_y = top + 10.0;
    for (int e = 0; e < n_est; ++e) {
        const char* color = kPalette[e % kPaletteSize];
        svg << "<line x1=\"" << legend_x << "\" y1=\"" << legend_y + 5.0 << "\" x2=\""
            << legend_x + 24.0 << "\" y2=\"" << legend_y + 5.0 << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << legend_x + 30.0 << "\" y=\"" << legend_y + 9.0
            << "\" font-family=\"sans-serif\" font-size=\"12\">"
            << escape_xml(report.estimator_names[static_cast<std::size_t>(e)]) << "</text>\n";
        legend_y += 18.0;
    }

    svg << "</svg>\n";
    if (!svg) throw io_error("failed while writing " + svg_path);
}

}  // namespace

std::string summary_path_for(const std::string& csv_path) {
    return strip_extension(csv_path) + "_summary.csv";
}

std::string metadata_path_for(const std::string& csv_path) {
    return strip_extension(csv_path) + "_meta.txt";
}

void write_report(const MseReport& report, const std::string& csv_path,
                  const std::string& svg_path, bool log_scale) {
    check_report(report);

    {
        std::ofstream csv = open_for_write(csv_path);
        csv << "estimator,t,mse_mean\n";
        for (std::size_t e = 0; e < report.estimator_names.size(); ++e)
            for (Eigen::Index t = 0; t < report.mse_mean.cols(); ++t)
                csv << report.estimator_names[e] << ',' << (t + 1) << ','
                    << format_full(report.mse_mean(static_cast<Eigen::Index>(e), t)) << '\n';
        if (!csv) throw io_error("failed while writing " + csv_path);
    }
    {
        std::ofstream csv = open_for_write(summary_path_for(csv_path));
        csv << "estimator,avg_mse\n";
        for (std::size_t e = 0; e < report.estimator_names.size(); ++e)
            csv << report.estimator_names[e] << ',' << format_full(report.avg_mse[e]) << '\n';
        if (!csv) throw io_error("failed while writing " + summary_path_for(csv_path));
    }
    {
        std::ofstream meta = open_for_write(metadata_path_for(csv_path));
        meta << "# run metadata\n";
        meta << "version = " << report.meta.version << "\n";
        meta << "rng = " << report.meta.rng_name << "\n";
        meta << "seed = " << report.meta.seed << "\n";
        meta << "trials = " << report.meta.trials << "\n";
        for (std::size_t e = 0; e < report.estimator_names.size(); ++e)
            meta << "divergent_trials[" << report.estimator_names[e]
                 << "] = " << report.diverged_trials[e] << "\n";
        meta << "# configuration echo\n";
        meta << report.meta.config_echo;
        if (!meta) throw io_error("failed while writing " + metadata_path_for(csv_path));
    }

    write_svg_chart(report, svg_path, log_scale);
}

TrajectoryCsv read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);

    std::string line;
    if (!std::getline(in, line) || line != "estimator,t,mse_mean")
        throw io_error(path + ": missing trajectory header");

    std::map<std::string, std::size_t> index;
    std::vector<std::string> names;
    std::vector<std::vector<double>> series;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) {
            std::ostringstream msg;
            msg << path << ": row " << row << ": expected 3 columns";
            throw io_error(msg.str());
        }
        const std::string name = line.substr(0, c1);
        const long t = std::strtol(line.c_str() + c1 + 1, nullptr, 10);
        const double value = std::strtod(line.c_str() + c2 + 1, nullptr);
        auto [it, inserted] = index.try_emplace(name, names.size());
        if (inserted) {
            names.push_back(name);
            series.emplace_back();
        }
        auto& s = series[it->second];
        if (t != static_cast<long>(s.size()) + 1) {
            std::ostringstream msg;
            msg << path << ": row " << row << ": time indices for '" << name
                << "' must run 1..T-1 in order";
            throw io_error(msg.str());
        }
        s.push_back(value);
    }
    if (names.empty()) throw io_error(path + ": no data rows");
    const std::size_t n_t = series.front().size();
    for (const auto& s : series)
        if (s.size() != n_t) throw io_error(path + ": estimators cover different time ranges");

    TrajectoryCsv out;
    out.estimator_names = std::move(names);
    out.mse_mean.resize(static_cast<Eigen::Index>(series.size()), static_cast<Eigen::Index>(n_t));
    for (std::size_t e = 0; e < series.size(); ++e)
        for (std::size_t t = 0; t < n_t; ++t)
            out.mse_mean(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(t)) = series[e][t];
    return out;
}

std::vector<std::pair<std::string, double>> read_summary_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);

    std::string line;
    if (!std::getline(in, line) || line != "estimator,avg_mse")
        throw io_error(path + ": missing summary header");

    std::vector<std::pair<std::string, double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw io_error(path + ": malformed summary row");
        rows.emplace_back(line.substr(0, comma), std::strtod(line.c_str() + comma + 1, nullptr));
    }
    return rows;
}

}  // namespace gsamp
