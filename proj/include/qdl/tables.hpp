#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "discrimination.hpp"
#include "learning.hpp"
#include "programmable.hpp"
#include "reading.hpp"

namespace qdl {

// Uniform grid; `points` == 0 gives an empty table.
struct Grid {
    double start = 0.0;
    double stop = 1.0;
    int points = 0;

    double at(int i) const
    {
        if (points <= 1)
            return start;
        return start + (stop - start) * i / (points - 1.0);
    }
};

struct TableSpec {
    std::string figure;
    std::optional<Grid> grid; // figure default when empty
};

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

// Shortest round trip is not wanted here: fixed 9 significant digits, period separator.
inline std::string format_number(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    if (x == 0.0)
        return "0";
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, 9);
    return std::string(buf.data(), res.ptr);
}

namespace detail {

struct FigureDef {
    std::string id;
    Grid grid;
    bool integer_x;
    std::vector<std::string> columns; // x column first
    std::function<std::vector<double>(double)> row;
};

inline double round_count(double x) { return std::round(x); }

inline std::vector<FigureDef> figure_catalog()
{
    std::vector<FigureDef> defs;

    defs.push_back({"fig3.5", {0.0, 0.2, 101}, false, {"r", "Ps_weak", "Ps_strong"}, [](double r) {
                        const double c = 0.7;
                        return std::vector<double>{r, weak_margin(c, r).p_success, strong_margin(c, r).p_success};
                    }});

    defs.push_back({"fig4.1", {0.05, 1.0, 20}, false, {"r", "Pe_n3", "Pe_n11", "Pe_n29"}, [](double r) {
                        return std::vector<double>{r, mixed_error(3, 3, r), mixed_error(11, 11, r), mixed_error(29, 29, r)};
                    }});

    defs.push_back({"fig4.2", {1, 30, 30}, true, {"n", "Pe_r0.2", "Pe_r0.5", "Pe_r0.7", "Pe_r1"}, [](double x) {
                        const int n = static_cast<int>(round_count(x));
                        return std::vector<double>{x, mixed_error(n, n, 0.2), mixed_error(n, n, 0.5), mixed_error(n, n, 0.7),
                                                   mixed_error(n, n, 1.0)};
                    }});

    defs.push_back({"fig4.3", {0.3, 1.0, 15}, false, {"r", "Pe_n20", "asymptote_n20", "Pe_n79", "asymptote_n79"},
                    [](double r) {
                        return std::vector<double>{r, mixed_error(20, 1, r), mixed_asymptote(20, r), mixed_error(79, 1, r),
                                                   mixed_asymptote(79, r)};
                    }});

    defs.push_back({"fig4.4", {1, 20, 20}, true, {"n", "Pe_hard_sphere", "Pe_bures", "Pe_chernoff", "Pe_r0.9"},
                    [](double x) {
                        const int n = static_cast<int>(round_count(x));
                        return std::vector<double>{x, universal_error(PuritySpec::hard_sphere(), n, n),
                                                   universal_error(PuritySpec::bures(), n, n),
                                                   universal_error(PuritySpec::chernoff(), n, n), mixed_error(n, n, 0.9)};
                    }});

    defs.push_back({"fig4.5", {0.0, 0.2, 101}, false, {"R", "Ps_weak", "Ps_strong"}, [](double big_r) {
                        return std::vector<double>{big_r, margin_success(9, 2, big_r, MarginScheme::weak).p_success,
                                                   margin_success(9, 2, big_r, MarginScheme::strong).p_success};
                    }});

    {
        std::vector<std::string> cols{"r"};
        for (int n = 1; n <= 5; ++n)
            cols.push_back("R_opt_n" + std::to_string(n));
        for (int n = 1; n <= 5; ++n)
            cols.push_back("R_LM_n" + std::to_string(n));
        defs.push_back({"fig5.1", {0.1, 1.0, 10}, false, cols, [](double r) {
                            std::vector<double> row{r};
                            const double known = known_state_error(r);
                            for (int n = 1; n <= 5; ++n)
                                row.push_back(mixed_error(n, 1, r) - known);
                            for (int n = 1; n <= 5; ++n)
                                row.push_back(lm_mixed_optimize(n, r).pe - known);
                            return row;
                        }});
    }

    defs.push_back({"fig6.2", {0.3, 1.5, 25}, false, {"alpha0", "squeeze_opt"},
                    [](double a) { return std::vector<double>{a, optimal_squeezing(a)}; }});

    defs.push_back({"fig6.3", {0.3, 1.5, 25}, false, {"alpha0", "R_opt", "R_eyd"}, [](double a) {
                        return std::vector<double>{a, collective_excess_risk(a), eyd_minimum(a).excess_risk};
                    }});
    return defs;
}

inline const FigureDef& find_figure(const std::string& id)
{
    static const auto catalog = figure_catalog();
    for (const auto& d : catalog)
        if (d.id == id)
            return d;
    throw DomainError("unknown figure id '" + id + "'");
}

} // namespace detail

inline std::vector<std::string> figure_ids()
{
    std::vector<std::string> out;
    for (const auto& d : detail::figure_catalog())
        out.push_back(d.id);
    return out;
}

inline Grid default_grid(const std::string& figure) { return detail::find_figure(figure).grid; }

// Rows are computed in parallel and assembled in grid order.
inline Table build_table(const TableSpec& spec)
{
    const auto& def = detail::find_figure(spec.figure);
    const Grid grid = spec.grid.value_or(def.grid);
    if (grid.points < 0)
        throw DomainError("grid point count must be nonnegative");
    Table t;
    t.columns = def.columns;
    t.rows = parallel_map<std::vector<double>>(static_cast<std::size_t>(grid.points), [&](std::size_t i) {
        double x = grid.at(static_cast<int>(i));
        if (def.integer_x)
            x = detail::round_count(x);
        return def.row(x);
    });
    return t;
}

inline void write_csv(const Table& t, std::ostream& out)
{
    for (std::size_t c = 0; c < t.columns.size(); ++c)
        out << (c ? "," : "") << t.columns[c];
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            out << (c ? "," : "") << format_number(row[c]);
        out << '\n';
    }
}

// One polyline per y column, data scaled into a fixed frame.
inline void write_svg(const Table& t, std::ostream& out)
{
    constexpr double width = 640, height = 420, margin = 50;
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const auto& row : t.rows)
        for (std::size_t c = 1; c < row.size(); ++c) {
            if (!std::isfinite(row[c]) || !std::isfinite(row[0]))
                continue;
            if (first) {
                xmin = xmax = row[0];
                ymin = ymax = row[c];
                first = false;
            }
            xmin = std::min(xmin, row[0]);
            xmax = std::max(xmax, row[0]);
            ymin = std::min(ymin, row[c]);
            ymax = std::max(ymax, row[c]);
        }
    if (xmax == xmin)
        xmax = xmin + 1;
    if (ymax == ymin)
        ymax = ymin + 1;
    auto sx = [&](double x) { return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin); };
    auto sy = [&](double y) { return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_number(width) << "\" height=\"" << format_number(height) << "\">\n";
    out << "<rect x=\"" << format_number(margin) << "\" y=\"" << format_number(margin) << "\" width=\"" << format_number(width - 2 * margin) << "\" height=\""
        << format_number(height - 2 * margin) << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << format_number(margin) << "\" y=\"" << format_number(height - 15) << "\" font-size=\"12\">" << t.columns.front() << " ["
        << format_number(xmin) << ", " << format_number(xmax) << "]; y [" << format_number(ymin) << ", "
        << format_number(ymax) << "]</text>\n";
    for (std::size_t c = 1; c < t.columns.size(); ++c) {
        const char* color = palette[(c - 1) % std::size(palette)];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
        bool sep = false;
        for (const auto& row : t.rows) {
            if (!std::isfinite(row[c]))
                continue;
            out << (sep ? " " : "") << format_number(sx(row[0])) << "," << format_number(sy(row[c]));
            sep = true;
        }
        out << "\"/>\n";
        out << "<text x=\"" << format_number(width - margin + 5) << "\" y=\"" << format_number(margin + 14.0 * c) << "\" font-size=\"10\" fill=\""
            << color << "\">" << t.columns[c] << "</text>\n";
    }
    out << "</svg>\n";
}

// Writes the CSV (and optional SVG) and returns the number of data rows.
inline std::size_t emit_table(const TableSpec& spec, std::ostream& csv, std::ostream* svg = nullptr)
{
    const auto t = build_table(spec);
    write_csv(t, csv);
    if (svg)
        write_svg(t, *svg);
    return t.rows.size();
}

} // namespace qdl
