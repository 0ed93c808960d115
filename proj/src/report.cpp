#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "kinreg/experiment.hpp"

namespace kinreg {

namespace fs = std::filesystem;

namespace {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] int column(const std::string& name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : static_cast<int>(it - header.begin());
    }
    [[nodiscard]] double num(std::size_t row, const std::string& name) const {
        const int c = column(name);
        if (c < 0 || static_cast<std::size_t>(c) >= rows[row].size()) return std::nan("");
        return std::strtod(rows[row][static_cast<std::size_t>(c)].c_str(), nullptr);
    }
    [[nodiscard]] const std::string& str(std::size_t row, const std::string& name) const {
        static const std::string empty;
        const int c = column(name);
        if (c < 0 || static_cast<std::size_t>(c) >= rows[row].size()) return empty;
        return rows[row][static_cast<std::size_t>(c)];
    }
};

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

Table read_csv(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path.string());
    Table t;
    std::string line;
    if (std::getline(is, line)) t.header = split(line);
    while (std::getline(is, line))
        if (!line.empty()) t.rows.push_back(split(line));
    return t;
}

std::string fmt(double x, const char* spec = "%.6g") {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, x);
    return buf;
}

// Minimal SVG line and bar charts. Coordinates are rounded to 0.01 so output is stable.
class Svg {
public:
    static constexpr double kW = 640, kH = 420, kL = 70, kR = 20, kT = 40, kB = 55;

    Svg(std::string title, std::string xlabel, std::string ylabel)
        : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

    void set_range(double x0, double x1, double y0, double y1) {
        if (!(x1 > x0)) x1 = x0 + 1.0;
        if (!(y1 > y0)) y1 = y0 + 1.0;
        x0_ = x0, x1_ = x1, y0_ = y0, y1_ = y1;
    }
    [[nodiscard]] double px(double x) const { return kL + (x - x0_) / (x1_ - x0_) * (kW - kL - kR); }
    [[nodiscard]] double py(double y) const { return kH - kB - (y - y0_) / (y1_ - y0_) * (kH - kT - kB); }

    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color) {
        body_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
        for (const auto& [x, y] : pts) body_ << fmt(px(x), "%.2f") << ',' << fmt(py(y), "%.2f") << ' ';
        body_ << "\"/>\n";
        for (const auto& [x, y] : pts)
            body_ << "<circle cx=\"" << fmt(px(x), "%.2f") << "\" cy=\"" << fmt(py(y), "%.2f") << "\" r=\"2\" fill=\""
                  << color << "\"/>\n";
    }
    void bar(double x0, double x1, double h) {
        body_ << "<rect x=\"" << fmt(px(x0), "%.2f") << "\" y=\"" << fmt(py(h), "%.2f") << "\" width=\""
              << fmt(px(x1) - px(x0), "%.2f") << "\" height=\"" << fmt(py(0.0) - py(h), "%.2f")
              << "\" fill=\"#4477aa\" stroke=\"white\"/>\n";
    }
    void vline(double x, const std::string& color, const std::string& label) {
        body_ << "<line x1=\"" << fmt(px(x), "%.2f") << "\" y1=\"" << kT << "\" x2=\"" << fmt(px(x), "%.2f")
              << "\" y2=\"" << kH - kB << "\" stroke=\"" << color << "\" stroke-dasharray=\"4 3\"/>\n";
        body_ << "<text x=\"" << fmt(px(x) + 4, "%.2f") << "\" y=\"" << kT + 12 << "\" font-size=\"11\" fill=\""
              << color << "\">" << label << "</text>\n";
    }

    [[nodiscard]] std::string str() const {
        std::ostringstream os;
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
           << "\" font-family=\"sans-serif\">\n";
        os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        os << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title_ << "</text>\n";
        os << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << kW - kL - kR << "\" height=\""
           << kH - kT - kB << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (int k = 0; k <= 4; ++k) {
            const double x = x0_ + (x1_ - x0_) * k / 4.0, y = y0_ + (y1_ - y0_) * k / 4.0;
            os << "<text x=\"" << fmt(px(x), "%.2f") << "\" y=\"" << kH - kB + 16
               << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(x, "%.3g") << "</text>\n";
            os << "<text x=\"" << kL - 6 << "\" y=\"" << fmt(py(y) + 4, "%.2f")
               << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(y, "%.3g") << "</text>\n";
        }
        os << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
           << xlabel_ << "</text>\n";
        os << "<text x=\"16\" y=\"" << kH / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
           << kH / 2 << ")\">" << ylabel_ << "</text>\n";
        os << body_.str() << "</svg>\n";
        return os.str();
    }

private:
    std::string title_, xlabel_, ylabel_;
    double x0_ = 0, x1_ = 1, y0_ = 0, y1_ = 1;
    std::ostringstream body_;
};

const char* kPalette[] = {"#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee", "#aa3377", "#bbbbbb"};

using Series = std::map<std::string, std::vector<std::pair<double, double>>>;

std::string line_chart(const std::string& title, const std::string& xl, const std::string& yl, const Series& series) {
    Svg svg(title, xl, yl);
    double x0 = kInf, x1 = -kInf, y0 = kInf, y1 = -kInf;
    for (const auto& [k, pts] : series)
        for (const auto& [x, y] : pts) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
        }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    svg.set_range(x0, x1, y0, y1);
    std::size_t c = 0;
    for (const auto& [k, pts] : series) {
        std::vector<std::pair<double, double>> finite;
        for (const auto& p : pts)
            if (std::isfinite(p.first) && std::isfinite(p.second)) finite.push_back(p);
        svg.polyline(finite, kPalette[c++ % std::size(kPalette)]);
    }
    return svg.str();
}

std::string histogram(const std::string& title, std::vector<double> values, double cap) {
    values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return !std::isfinite(v); }),
                 values.end());
    Svg svg(title, "ratio", "members");
    if (values.empty()) {
        svg.set_range(0, 1, 0, 1);
        return svg.str();
    }
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    double lo = *lo_it, hi = *hi_it;
    if (std::isfinite(cap)) hi = std::max(hi, cap);
    if (hi == lo) hi = lo + (lo == 0.0 ? 1.0 : std::abs(lo) * 0.1);
    constexpr int kBins = 20;
    std::vector<int> counts(kBins, 0);
    for (double v : values) counts[static_cast<std::size_t>(std::clamp(static_cast<int>((v - lo) / (hi - lo) * kBins), 0, kBins - 1))]++;
    svg.set_range(lo, hi, 0.0, static_cast<double>(*std::max_element(counts.begin(), counts.end())));
    for (int k = 0; k < kBins; ++k)
        svg.bar(lo + (hi - lo) * k / kBins, lo + (hi - lo) * (k + 1) / kBins, counts[static_cast<std::size_t>(k)]);
    if (std::isfinite(cap)) svg.vline(cap, "#cc3311", "cap");
    return svg.str();
}

void write_file(const fs::path& p, const std::string& s) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    os << s;
}

std::string grid_of(const Table& t, std::size_t r) { return t.str(r, "nx") + "x" + t.str(r, "nv") + "x" + t.str(r, "nt"); }

}  // namespace

ReportOutput run_report(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw std::runtime_error("report: no such directory: " + dir.string());
    std::vector<fs::path> csvs;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".csv") csvs.push_back(e.path());
    std::sort(csvs.begin(), csvs.end());
    if (csvs.empty()) throw std::runtime_error("report: no CSV files in " + dir.string());

    ReportOutput out;
    std::ostringstream sum;
    sum << "kinreg report\n";
    sum << "inputs:";
    for (const auto& p : csvs) sum << ' ' << p.filename().string();
    sum << "\n\n";

    // Estimate tables: every CSV whose first column is estimate_id.
    struct Stat {
        std::size_t rows = 0, failed = 0, nonfinite = 0;
        double max_ratio = -kInf;
        std::vector<double> ratios;
    };
    std::map<std::string, Stat> stats;
    for (const auto& p : csvs) {
        const Table t = read_csv(p);
        if (t.header.empty() || t.header[0] != "estimate_id") continue;
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            Stat& s = stats[t.rows[r][0]];
            ++s.rows;
            const double ratio = t.num(r, "ratio");
            if (!std::isfinite(ratio)) ++s.nonfinite;
            else {
                s.max_ratio = std::max(s.max_ratio, ratio);
                s.ratios.push_back(ratio);
            }
            if (t.str(r, "pass") != "1") ++s.failed;
        }
    }
    if (!stats.empty()) {
        sum << "estimates\n";
        char line[256];
        for (const auto& [id, s] : stats) {
            std::snprintf(line, sizeof line, "  %-20s rows=%-5zu max_ratio=%-14s failed=%-4zu %s\n", id.c_str(), s.rows,
                          fmt(s.max_ratio).c_str(), s.failed, s.failed == 0 && s.nonfinite == 0 ? "PASS" : "FAIL");
            sum << line;
            const fs::path svg = dir / ("ratio_hist_" + id + ".svg");
            write_file(svg, histogram("ratio histogram: " + id, s.ratios, kNaN));
            out.files.push_back(svg);
        }
        sum << '\n';
    }

    const fs::path holder_csv = dir / "holder.csv";
    if (fs::exists(holder_csv)) {
        const Table t = read_csv(holder_csv);
        Series series;
        double amin = kInf, lmin = kInf;
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const std::string key = t.str(r, "seed") + "@" + grid_of(t, r);
            series[key].push_back({std::log10(t.num(r, "scale")), std::log10(t.num(r, "oscillation"))});
            amin = std::min(amin, t.num(r, "alpha_hat"));
            const double l = t.num(r, "lambda_hat");
            lmin = std::min(lmin, std::isnan(l) ? -kInf : l);
        }
        const fs::path svg = dir / "oscillation_decay.svg";
        write_file(svg, line_chart("oscillation decay", "log10 r", "log10 osc / osc(r_max)", series));
        out.files.push_back(svg);
        sum << "holder\n  runs=" << series.size() << " min_alpha_hat=" << fmt(amin) << " min_lambda_hat=" << fmt(lmin)
            << "\n\n";
    }

    const fs::path moser_csv = dir / "moser.csv";
    if (fs::exists(moser_csv)) {
        const Table t = read_csv(moser_csv);
        Series products, norms;
        double max_q = 0.0;
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const std::string key = t.str(r, "seed") + "@" + grid_of(t, r);
            const double n = t.num(r, "n");
            products[key].push_back({n, std::log10(t.num(r, "partial_product"))});
            norms[key].push_back({n, std::log10(t.num(r, "norm")) / t.num(r, "q")});
            max_q = std::max(max_q, t.num(r, "q"));
        }
        const fs::path p1 = dir / "moser_products.svg", p2 = dir / "moser_norms.svg";
        write_file(p1, line_chart("Moser partial products", "n", "log10 prod C_k^(1/(2 kappa^k))", products));
        write_file(p2, line_chart("Moser level norms", "n", "log10 ||g^q||^(1/q)", norms));
        out.files.push_back(p1);
        out.files.push_back(p2);
        sum << "moser\n  runs=" << products.size() << " max_q=" << fmt(max_q) << "\n\n";
    }

    const fs::path dsum = dir / "doubling_summary.csv";
    if (fs::exists(dsum)) {
        const Table t = read_csv(dsum);
        std::size_t holds = 0, conclusive = 0, exceptions = 0;
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            holds += t.str(r, "bound_holds") == "1";
            conclusive += t.str(r, "conclusive") == "1";
            exceptions += static_cast<std::size_t>(t.num(r, "monotonicity_exceptions"));
        }
        sum << "doubling\n  runs=" << t.rows.size() << " conclusive=" << conclusive << " bound_holds=" << holds
            << " monotonicity_exceptions=" << exceptions << "\n\n";
    }

    const fs::path dg = dir / "degiorgi_summary.csv";
    if (fs::exists(dg)) {
        const Table t = read_csv(dg);
        sum << "degiorgi\n";
        for (std::size_t r = 0; r < t.rows.size(); ++r)
            sum << "  grid " << grid_of(t, r) << " alpha_hat=" << t.str(r, "alpha_hat")
                << " qualifying=" << t.str(r, "qualifying") << " " << t.str(r, "status") << '\n';
        sum << '\n';
    }

    const fs::path agg = dir / "aggregate.csv";
    if (fs::exists(agg)) {
        const Table t = read_csv(agg);
        sum << "refinement\n";
        bool any = false;
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            if (t.str(r, "statistic") != "refinement_change_pct") continue;
            any = true;
            sum << "  " << t.str(r, "estimate_id") << " change=" << fmt(t.num(r, "value")) << "%\n";
        }
        if (!any) sum << "  (single grid)\n";
        sum << '\n';
    }

    const fs::path errors = dir / "errors.csv";
    if (fs::exists(errors)) sum << "errors\n  rows=" << read_csv(errors).rows.size() << "\n\n";

    out.summary = sum.str();
    write_file(dir / "summary.txt", out.summary);
    out.files.push_back(dir / "summary.txt");
    return out;
}

}  // namespace kinreg
