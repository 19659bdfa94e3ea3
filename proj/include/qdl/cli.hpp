#pragma once

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "povm_json.hpp"
#include "tables.hpp"

namespace qdl::cli {

enum ExitCode { ok = 0, computation_error = 1, usage_error = 2 };

namespace detail {

// Thrown for flag combinations the parser cannot express.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void write_row(std::ostream& out, const std::vector<std::string>& header, const std::vector<double>& values)
{
    Table t{header, {values}};
    write_csv(t, out);
}

inline MarginScheme parse_scheme(const std::string& s) { return s == "strong" ? MarginScheme::strong : MarginScheme::weak; }

struct DiscriminateArgs {
    double overlap = 0.0;
    double prior = 0.5;
    std::string mode = "minerr";
    std::optional<double> margin;
};

inline void discriminate(const DiscriminateArgs& a, std::ostream& out)
{
    if (a.mode == "minerr") {
        const double pe = pure_overlap_error(a.overlap, a.prior);
        write_row(out, {"Pe", "Ps"}, {pe, 1.0 - pe});
        return;
    }
    if (a.mode == "unambiguous") {
        const double q = unambiguous_q(a.overlap, a.prior);
        write_row(out, {"Q", "Ps"}, {q, 1.0 - q});
        return;
    }
    if (!a.margin)
        throw UsageError("--mode " + a.mode + " needs --margin");
    if (a.prior != 0.5)
        throw DomainError("error margins are implemented for equal priors only");
    const auto scheme = parse_scheme(a.mode);
    const auto m = margin(a.overlap, *a.margin, scheme);
    const double conf = m.p_inconclusive < 1.0 ? confidence(a.overlap, *a.margin, scheme) : std::nan("");
    write_row(out, {"Ps", "Pe", "Q", "phi", "critical_margin", "confidence"},
              {m.p_success, m.p_error, m.p_inconclusive, m.phi.value_or(std::nan("")), critical_margin(a.overlap), conf});
}

struct ProgrammableArgs {
    int n = 1;
    int nprime = 1;
    std::optional<int> na, nb, nc;
    std::optional<double> purity;
    std::optional<std::string> prior;
    std::optional<double> margin;
    std::string scheme = "weak";
};

inline void programmable(const ProgrammableArgs& a, std::ostream& out)
{
    const PortLoad load{a.na.value_or(a.n), a.nb.value_or(a.nprime), a.nc.value_or(a.n)};
    load.validate();
    if (a.purity && a.prior)
        throw UsageError("--purity and --prior are exclusive");
    if (a.margin) {
        if (a.purity || a.prior || a.na || a.nb || a.nc)
            throw UsageError("--margin applies to pure states with equal program loads");
        const auto curve = margin_success(a.n, a.nprime, *a.margin, parse_scheme(a.scheme));
        write_row(out, {"R", "Ps", "critical_margin"}, {*a.margin, curve.p_success, curve.critical});
        return;
    }
    if (a.prior) {
        PuritySpec spec;
        if (*a.prior == "hs")
            spec = PuritySpec::hard_sphere();
        else if (*a.prior == "bures")
            spec = PuritySpec::bures();
        else
            spec = PuritySpec::chernoff();
        write_row(out, {"Pe"}, {universal_error(spec, load)});
        return;
    }
    if (a.purity && *a.purity < 1.0) {
        write_row(out, {"Pe"}, {mixed_error(load, *a.purity)});
        return;
    }
    const auto rates = general_rates(load);
    write_row(out, {"Q", "Pe"}, {rates.q, rates.pe});
}

struct LearnArgs {
    int n = 1;
    double purity = 1.0;
    std::string strategy = "lm";
};

inline void learn(const LearnArgs& a, std::ostream& out)
{
    const double known = known_state_error(a.purity);
    double pe = 0.0;
    if (a.strategy == "sdp" || (a.strategy == "lm" && a.purity < 1.0)) {
        const auto opt = lm_mixed_optimize(a.n, a.purity);
        write_row(out, {"n", "r", "Pe", "excess_risk", "optimal_Pe", "residual", "gap"},
                  {double(a.n), a.purity, opt.pe, opt.pe - known, mixed_error(a.n, 1, a.purity), opt.residual, opt.gap});
        return;
    }
    if (a.purity < 1.0)
        throw DomainError("strategy " + a.strategy + " is defined for pure states only");
    if (a.strategy == "lm")
        pe = lm_error(a.n);
    else if (a.strategy == "eyd")
        pe = eyd_qubit(a.n).pe;
    else
        pe = reversed_error(a.n);
    write_row(out, {"n", "r", "Pe", "excess_risk"}, {double(a.n), a.purity, pe, pe - known});
}

struct ReadArgs {
    double alpha0 = 1.0;
    std::string strategy = "collective";
    std::optional<double> squeeze;
    bool oracle = false;
    int naux = 1;
    std::optional<double> mu;
    int quad = 32;
};

inline void read(const ReadArgs& a, std::ostream& out)
{
    const bool eyd = a.strategy == "eyd";
    if (a.oracle) {
        ReadingConfig cfg{cplx(a.alpha0, 0.0), a.mu.value_or(1.0), a.naux};
        double squeeze = 0.0;
        if (eyd)
            squeeze = a.squeeze ? *a.squeeze : optimal_squeezing(std::abs(a.alpha0));
        const auto res = finite_n_oracle(cfg, eyd ? ReadingStrategy::eyd : ReadingStrategy::collective, squeeze, a.quad);
        write_row(out, {"alpha0", "n", "mu", "squeeze", "Pe", "Pe_known", "excess_risk"},
                  {a.alpha0, double(a.naux), cfg.mu, squeeze, res.pe, res.pe_known, res.excess});
        return;
    }
    const double amp = std::abs(a.alpha0);
    if (!eyd) {
        const double risk = a.mu ? collective_excess_risk(amp, *a.mu) : collective_excess_risk(amp);
        write_row(out, {"alpha0", "excess_risk"}, {a.alpha0, risk});
        return;
    }
    if (a.mu)
        throw UsageError("--mu applies to the collective strategy or to --oracle");
    const auto best = a.squeeze ? EydOptimum{*a.squeeze, eyd_excess_risk(amp, *a.squeeze)} : eyd_minimum(amp);
    write_row(out, {"alpha0", "squeeze", "excess_risk"}, {a.alpha0, best.squeeze, best.excess_risk});
}

struct DecomposeArgs {
    std::string input;
    bool ordered = false;
    std::optional<std::string> output;
};

inline void decompose_file(const DecomposeArgs& a, std::ostream& out)
{
    const auto povm = read_povm_file(a.input);
    const auto result = decompose(povm, a.ordered ? DecompositionOrder::fewest_outcomes : DecompositionOrder::any);
    const auto text = decomposition_to_json(result).dump(2);
    if (!a.output) {
        out << text << '\n';
        return;
    }
    std::ofstream file(*a.output);
    if (!file)
        throw DomainError("cannot write " + *a.output);
    file << text << '\n';
    if (!file)
        throw DomainError("write failed for " + *a.output);
}

struct TableArgs {
    std::string figure;
    std::optional<std::string> out;
    std::optional<std::string> svg;
    std::optional<double> from, to;
    std::optional<int> points;
};

inline void table(const TableArgs& a, std::ostream& out)
{
    TableSpec spec{a.figure, std::nullopt};
    if (a.from || a.to || a.points) {
        Grid g = default_grid(a.figure);
        g.start = a.from.value_or(g.start);
        g.stop = a.to.value_or(g.stop);
        g.points = a.points.value_or(g.points);
        spec.grid = g;
    }
    const auto t = build_table(spec);
    if (a.out) {
        std::ofstream file(*a.out);
        if (!file)
            throw DomainError("cannot write " + *a.out);
        write_csv(t, file);
        if (!file)
            throw DomainError("write failed for " + *a.out);
    } else {
        write_csv(t, out);
    }
    if (a.svg) {
        std::ofstream file(*a.svg);
        if (!file)
            throw DomainError("cannot write " + *a.svg);
        write_svg(t, file);
        if (!file)
            throw DomainError("write failed for " + *a.svg);
    }
}

} // namespace detail

// Parses argv, runs one command, writes results to `out` and diagnostics to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Quantum discrimination toolkit", "qdl"};
    app.require_subcommand(1);

    detail::DiscriminateArgs dis;
    auto* cmd_dis = app.add_subcommand("discriminate", "Two known pure states with overlap c");
    cmd_dis->add_option("--overlap", dis.overlap, "State overlap c")->required()->check(CLI::Range(0.0, 1.0));
    cmd_dis->add_option("--prior", dis.prior, "Prior of the first state")->check(CLI::Range(0.0, 1.0));
    cmd_dis->add_option("--mode", dis.mode)->check(CLI::IsMember({"minerr", "unambiguous", "weak", "strong"}));
    cmd_dis->add_option("--margin", dis.margin, "Error margin")->check(CLI::Range(0.0, 1.0));

    detail::ProgrammableArgs prog;
    auto* cmd_prog = app.add_subcommand("programmable", "Programmable discrimination machine");
    cmd_prog->add_option("--n", prog.n, "Copies at each program port")->check(CLI::PositiveNumber);
    cmd_prog->add_option("--nprime", prog.nprime, "Copies at the data port")->check(CLI::PositiveNumber);
    cmd_prog->add_option("--na", prog.na)->check(CLI::PositiveNumber);
    cmd_prog->add_option("--nb", prog.nb)->check(CLI::PositiveNumber);
    cmd_prog->add_option("--nc", prog.nc)->check(CLI::PositiveNumber);
    cmd_prog->add_option("--purity", prog.purity, "Bloch radius r")->check(CLI::Range(0.0, 1.0));
    cmd_prog->add_option("--prior", prog.prior, "Purity prior")->check(CLI::IsMember({"hs", "bures", "chernoff"}));
    cmd_prog->add_option("--margin", prog.margin, "Global error margin R")->check(CLI::Range(0.0, 1.0));
    cmd_prog->add_option("--scheme", prog.scheme)->check(CLI::IsMember({"weak", "strong"}));

    detail::LearnArgs learn;
    auto* cmd_learn = app.add_subcommand("learn", "Learning machines for qubit classification");
    cmd_learn->add_option("--n", learn.n, "Training copies per class")->required()->check(CLI::PositiveNumber);
    cmd_learn->add_option("--purity", learn.purity, "Bloch radius r")->check(CLI::Range(0.0, 1.0));
    cmd_learn->add_option("--strategy", learn.strategy)->check(CLI::IsMember({"lm", "eyd", "reversed", "sdp"}));

    detail::ReadArgs rd;
    auto* cmd_read = app.add_subcommand("read", "Quantum reading of a coherent-state memory");
    cmd_read->add_option("--alpha0", rd.alpha0, "Prior amplitude estimate")->required();
    cmd_read->add_option("--strategy", rd.strategy)->check(CLI::IsMember({"collective", "eyd"}));
    cmd_read->add_option("--squeeze", rd.squeeze, "Heterodyne squeezing");
    cmd_read->add_flag("--oracle", rd.oracle, "Finite-n Fock-space evaluation");
    cmd_read->add_option("--naux", rd.naux, "Auxiliary modes")->check(CLI::PositiveNumber);
    cmd_read->add_option("--mu", rd.mu, "Prior width")->check(CLI::PositiveNumber);
    cmd_read->add_option("--quad", rd.quad, "Quadrature order")->check(CLI::Range(2, 400));

    detail::DecomposeArgs dec;
    auto* cmd_dec = app.add_subcommand("decompose", "Decompose a POVM into extremal POVMs");
    cmd_dec->add_option("--input", dec.input, "POVM JSON file")->required();
    cmd_dec->add_flag("--ordered", dec.ordered, "Prefer extremals with few outcomes (qubits)");
    cmd_dec->add_option("--output", dec.output, "Result JSON file (stdout if omitted)");

    detail::TableArgs tab;
    auto* cmd_tab = app.add_subcommand("table", "Tabulate a figure as CSV");
    cmd_tab->add_option("--figure", tab.figure, "Figure id")->required()->check(CLI::IsMember(figure_ids()));
    cmd_tab->add_option("--out", tab.out, "CSV file (stdout if omitted)");
    cmd_tab->add_option("--svg", tab.svg, "SVG plot file");
    cmd_tab->add_option("--from", tab.from, "First grid value");
    cmd_tab->add_option("--to", tab.to, "Last grid value");
    cmd_tab->add_option("--points", tab.points, "Grid point count")->check(CLI::NonNegativeNumber);

    try {
        std::vector<std::string> args;
        for (int i = argc - 1; i >= 1; --i)
            args.emplace_back(argv[i]);
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return usage_error;
    }

    try {
        if (*cmd_dis)
            detail::discriminate(dis, out);
        else if (*cmd_prog)
            detail::programmable(prog, out);
        else if (*cmd_learn)
            detail::learn(learn, out);
        else if (*cmd_read)
            detail::read(rd, out);
        else if (*cmd_dec)
            detail::decompose_file(dec, out);
        else
            detail::table(tab, out);
    } catch (const detail::UsageError& e) {
        err << "error: " << e.what() << "\n";
        return usage_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return computation_error;
    }
    return ok;
}

} // namespace qdl::cli
