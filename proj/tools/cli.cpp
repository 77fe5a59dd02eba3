#include "cli.hpp"

#include "run_config.hpp"

#include "epp/ergodic.hpp"
#include "epp/errors.hpp"
#include "epp/short_cycle.hpp"
#include "epp/svi_mc.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#ifndef EPP_VERSION
#define EPP_VERSION "0.0.0"
#endif

namespace epp::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string functionals;
    std::string out_dir = ".";
    long long seed = -1;
    bool dump_fields = false;
    // per command
    std::string method = "both";
    std::string lambda_list;
    std::string estimator = "time";
    std::string start;
    long long steps = 100000;
    long long every = 100;
    std::string ybar1_list;
    std::string kind = "grid";
    int levels = 3;
};

class Context {
public:
    Context(RunConfig cfg, const Options& opt, std::string command, std::ostream& out)
        : cfg(std::move(cfg)), opt(opt), command(std::move(command)), out(out), dir(opt.out_dir) {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw std::ios_base::failure("cannot create output directory '" + dir.string() + "'");
    }

    RunConfig cfg;
    const Options& opt;
    std::string command;
    std::ostream& out;
    fs::path dir;

    std::shared_ptr<const Grid> grid() const {
        if (!grid_) grid_ = build_grid(cfg.params(), cfg.grid);
        return grid_;
    }

    std::vector<std::string> functionals(std::vector<std::string> fallback) const {
        return cfg.functionals.empty() ? fallback : cfg.functionals;
    }

    json grid_meta() const {
        const Grid& g = *grid();
        return {{"L", g.L()}, {"Ny", g.ny()}, {"Nz", g.nz()}, {"hy", g.hy()}, {"hz", g.hz()},
                {"drift", std::string(to_string(g.config().drift))}, {"tol", g.tol()}};
    }

    void write_report(json body) const {
        json report = {{"artifact", "epp"},
                       {"version", EPP_VERSION},
                       {"command", command},
                       {"config_hash", cfg.hash()},
                       {"config", cfg.to_json()}};
        for (auto it = body.begin(); it != body.end(); ++it) report[it.key()] = it.value();
        write_text(command + ".json", report.dump(2) + "\n");
    }

    void write_text(const std::string& name, const std::string& text) const {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw std::ios_base::failure("cannot write '" + (dir / name).string() + "'");
        f << text;
    }

    void write_field(const std::string& stem, const Field& field) const {
        std::ostringstream csv;
        write_field_csv(csv, field);
        write_text(stem + ".csv", csv.str());
        write_text("plot_" + stem + ".py", field_plot_script(stem));
    }

    void write_table(const std::string& stem, const std::string& header, const std::vector<std::vector<double>>& rows,
                     const std::string& xlabel, const std::string& ylabel, bool logy) const {
        std::ostringstream csv;
        csv << header << '\n' << std::setprecision(17);
        for (const auto& r : rows) {
            for (std::size_t k = 0; k < r.size(); ++k) {
                if (k) csv << ',';
                if (std::isfinite(r[k])) csv << r[k];
            }
            csv << '\n';
        }
        write_text(stem + ".csv", csv.str());
        write_text("plot_" + stem + ".py", table_plot_script(stem, xlabel, ylabel, logy));
    }

private:
    mutable std::shared_ptr<const Grid> grid_;

    static std::string field_plot_script(const std::string& stem) {
        return "import pandas as pd\n"
               "import matplotlib.pyplot as plt\n\n"
               "d = pd.read_csv('" + stem + ".csv')\n"
               "s = d[d.region == 'interior']\n"
               "fig, ax = plt.subplots(figsize=(8, 4))\n"
               "t = ax.tricontourf(s.y, s.z, s.value, levels=40)\n"
               "fig.colorbar(t, ax=ax)\n"
               "for name, r in d[d.region != 'interior'].groupby('region'):\n"
               "    ax.plot(r.y, r.z, '.', ms=2, label=name)\n"
               "ax.set_xlabel('y')\n"
               "ax.set_ylabel('z')\n"
               "ax.set_title('" + stem + "')\n"
               "fig.savefig('" + stem + ".png', dpi=150, bbox_inches='tight')\n";
    }

    static std::string table_plot_script(const std::string& stem, const std::string& xlabel, const std::string& ylabel,
                                         bool logy) {
        return "import pandas as pd\n"
               "import matplotlib.pyplot as plt\n\n"
               "d = pd.read_csv('" + stem + ".csv')\n"
               "fig, ax = plt.subplots()\n"
               "for c in d.columns[1:]:\n"
               "    ax.plot(d[d.columns[0]], d[c], marker='.', label=c)\n" +
               std::string(logy ? "ax.set_yscale('log')\n" : "") +
               "ax.set_xlabel('" + xlabel + "')\n"
               "ax.set_ylabel('" + ylabel + "')\n"
               "ax.legend()\n"
               "fig.savefig('" + stem + ".png', dpi=150, bbox_inches='tight')\n";
    }
};

std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
    std::vector<double> out;
    for (const auto& item : split_list(text)) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ValidationError("--" + what + ": '" + item + "' is not a number");
        }
    }
    return out;
}

std::string fmt(double v) {
    std::ostringstream s;
    s << std::setprecision(10) << v;
    return s.str();
}

json report_json(const GammaIterationReport& r) {
    return {{"ybar", r.ybar},
            {"ybar1", r.ybar1},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"residuals", r.residuals},
            {"measured_ratio", r.measured_ratio},
            {"certified_rho", r.certified_rho},
            {"ratio_within_certificate", r.measured_ratio <= r.certified_rho + 0.05},
            {"exterior_bound_excess", r.exterior_bound_excess},
            {"exterior_min", r.exterior_min}};
}

json estimate_json(const Estimate& e) {
    return {{"estimate", e.value}, {"stderr", e.std_error}, {"count", e.count},
            {"replicas", e.replicas}, {"batches", e.batches}, {"discarded", e.discarded}};
}

json traces_json(const Field& v) {
    return {{"(0-,Y)", v.trace(Junction::top_interior)},
            {"(0+,Y)", v.trace(Junction::top_ray)},
            {"(0+,-Y)", v.trace(Junction::bottom_interior)},
            {"(0-,-Y)", v.trace(Junction::bottom_ray)}};
}

// ---------------------------------------------------------------------------

void cmd_measure(const Context& ctx) {
    const auto grid = ctx.grid();
    const ErgodicSolver es(grid, 0.0);
    json rows = json::array();
    for (const auto& f : resolve_functionals(ctx.cfg, ctx.functionals({"one"}))) {
        const Field v = es.short_cycle(f);
        const InvariantMeasureResult m = es.measure_from(v);
        rows.push_back({{"f", f.name},
                        {"nu", m.nu},
                        {"numerator_traces", {{"v(0-,Y;f)", m.numerator_top}, {"v(0+,-Y;f)", m.numerator_bottom}}},
                        {"denominator", m.denominator},
                        {"method", m.method}});
        ctx.out << "nu[" << f.name << "] = " << fmt(m.nu) << '\n';
        if (ctx.opt.dump_fields) ctx.write_field("u_" + f.name, es.corrector(f));
    }
    ctx.write_report({{"grid", ctx.grid_meta()}, {"results", rows}});
}

void cmd_cycle(const Context& ctx) {
    const std::string method = ctx.opt.method;
    if (method != "monolithic" && method != "decomposed" && method != "both")
        throw ValidationError("--method must be monolithic, decomposed or both");
    const auto grid = ctx.grid();
    const ShortCycleSolver mono(grid, 0.0);
    json rows = json::array();
    for (const auto& f : resolve_functionals(ctx.cfg, ctx.functionals({"one"}))) {
        json row = {{"f", f.name}};
        std::optional<Field> v;
        if (method != "decomposed") {
            v = mono.solve(f);
            row["monolithic"] = {{"traces", traces_json(*v)}, {"sup", v->sup_norm()}};
            if (ctx.opt.dump_fields) ctx.write_field("v_" + f.name, *v);
        }
        if (method != "monolithic") {
            const Decomposition d = decompose_short_cycle(f, grid, ctx.cfg.gamma);
            row["decomposed"] = {{"traces", traces_json(d.total)},
                                 {"v_e", report_json(d.ve_report)},
                                 {"v_plus", report_json(d.plus_report)},
                                 {"v_minus", report_json(d.minus_report)}};
            if (v) row["sup_difference"] = sup_diff(*v, d.total);
            std::vector<std::vector<double>> hist;
            const std::size_t n = std::max({d.ve_report.residuals.size(), d.plus_report.residuals.size(),
                                            d.minus_report.residuals.size()});
            auto at = [](const std::vector<double>& r, std::size_t k) {
                return k < r.size() ? r[k] : std::numeric_limits<double>::quiet_NaN();
            };
            for (std::size_t k = 0; k < n; ++k)
                hist.push_back({static_cast<double>(k + 1), at(d.ve_report.residuals, k),
                                at(d.plus_report.residuals, k), at(d.minus_report.residuals, k)});
            ctx.write_table("gamma_" + f.name, "iteration,v_e,v_plus,v_minus", hist, "iteration",
                            "trace residual", true);
            if (ctx.opt.dump_fields) ctx.write_field("v_decomposed_" + f.name, d.total);
            ctx.out << "cycle[" << f.name << "] rho = " << fmt(d.ve_report.certified_rho)
                    << ", measured ratio = " << fmt(d.ve_report.measured_ratio);
            if (v) ctx.out << ", sup |monolithic - decomposed| = " << fmt(sup_diff(*v, d.total));
            ctx.out << '\n';
        } else {
            ctx.out << "cycle[" << f.name << "] v(0-,Y) = " << fmt(v->trace(Junction::top_interior)) << '\n';
        }
        rows.push_back(row);
    }
    ctx.write_report({{"grid", ctx.grid_meta()}, {"method", method}, {"results", rows}});
}

void cmd_resolvent(const Context& ctx) {
    const auto grid = ctx.grid();
    const auto lambdas = ctx.opt.lambda_list.empty() ? ctx.cfg.lambdas : parse_numbers(ctx.opt.lambda_list, "lambda");
    for (double l : lambdas)
        if (!(l > 0.0)) throw ValidationError("--lambda: every value must be > 0");
    const auto probes = probe_points(*grid);
    const ErgodicSolver limit(grid, 0.0);
    json rows = json::array();
    for (const auto& f : resolve_functionals(ctx.cfg, ctx.functionals({"y_plus_y2"}))) {
        const double nu = limit.measure(f).nu;
        json sweep = json::array();
        std::vector<std::vector<double>> gaps(probes.size());
        for (std::size_t li = 0; li < lambdas.size(); ++li) {
            const double l = lambdas[li];
            const ResolventPair direct = solve_u_lambda_direct(f, l, grid);
            const Field formula = u_lambda_by_formula(f, l, grid);
            json probe_rows = json::array();
            for (std::size_t p = 0; p < probes.size(); ++p) {
                const double lu = l * direct.u_lambda.values[probes[p].index];
                gaps[p].push_back(std::abs(lu - nu));
                probe_rows.push_back({{"probe", probes[p].name}, {"y", probes[p].y}, {"z", probes[p].z},
                                      {"lambda_u", lu}, {"gap", std::abs(lu - nu)}});
            }
            const double diff = sup_diff(direct.u_lambda, formula);
            sweep.push_back({{"lambda", l},
                             {"nu_lambda", direct.nu_lambda},
                             {"sup_direct_minus_formula", diff},
                             {"sup_u", direct.u_lambda.sup_norm()},
                             {"f_sup", direct.f_sup},
                             {"bound_excess", direct.bound_excess},
                             {"bound_ok", direct.bound_ok},
                             {"probes", probe_rows}});
            ctx.out << "resolvent[" << f.name << "] lambda = " << fmt(l) << ": sup |direct - formula| = " << fmt(diff)
                    << ", nu_lambda = " << fmt(direct.nu_lambda) << '\n';
            if (ctx.opt.dump_fields) ctx.write_field("u_lambda_" + f.name + "_" + std::to_string(li), direct.u_lambda);
        }
        bool monotone = true;
        for (const auto& g : gaps)
            for (std::size_t k = 1; k < g.size(); ++k) monotone = monotone && g[k] < g[k - 1];
        rows.push_back({{"f", f.name}, {"nu", nu}, {"sweep", sweep}, {"gaps_strictly_decreasing", monotone}});
    }
    ctx.write_report({{"grid", ctx.grid_meta()}, {"results", rows}});
}

void cmd_pi(const Context& ctx) {
    const auto grid = ctx.grid();
    const auto ls = ctx.opt.lambda_list.empty() ? std::vector<double>{0.0} : parse_numbers(ctx.opt.lambda_list, "lambda");
    if (ls.size() != 1 || ls[0] < 0.0) throw ValidationError("--lambda: pi takes a single value >= 0");
    const double lambda = ls[0];
    const Field pp = solve_pi(+1, lambda, grid);
    const Field pm = solve_pi(-1, lambda, grid);
    double mirror = 0.0;
    for (int idx = 0; idx < grid->size(); ++idx)
        mirror = std::max(mirror, std::abs(pm.values[idx] - pp.values[grid->mirror(idx)]));
    json body = {{"grid", ctx.grid_meta()},
                 {"lambda", lambda},
                 {"pi_plus", {{"min", pp.values.minCoeff()}, {"max", pp.values.maxCoeff()}, {"traces", traces_json(pp)}}},
                 {"pi_minus", {{"min", pm.values.minCoeff()}, {"max", pm.values.maxCoeff()}, {"traces", traces_json(pm)}}},
                 {"mirror_defect", mirror}};
    if (lambda == 0.0) {
        const double defect = ((pp.values + pm.values).array() - 1.0).abs().maxCoeff();
        body["sup_sum_minus_one"] = defect;
        body["partition_ok"] = defect <= 1e-8;
        ctx.out << "pi: sup |pi+ + pi- - 1| = " << fmt(defect) << (defect <= 1e-8 ? " (<= 1e-8)" : " (> 1e-8)") << '\n';
    } else {
        ctx.out << "pi_lambda: lambda = " << fmt(lambda) << ", mirror defect = " << fmt(mirror) << '\n';
    }
    ctx.write_field("pi_plus", pp);
    ctx.write_field("pi_minus", pm);
    ctx.write_report(body);
}

std::pair<double, double> parse_point(const std::string& text) {
    const auto v = parse_numbers(text, "start");
    if (v.size() != 2) throw ValidationError("--start needs 'y,z'");
    return {v[0], v[1]};
}

void cmd_simulate(const Context& ctx) {
    const auto params = ctx.cfg.params();
    const std::string est = ctx.opt.estimator;
    json body = {{"estimator", est}};
    if (est == "time") {
        const auto fs = resolve_functionals(ctx.cfg, ctx.functionals({"y2"}));
        const auto e = estimate_time_averages(fs, params, ctx.cfg.sim);
        json rows = json::array();
        for (std::size_t k = 0; k < fs.size(); ++k) {
            json row = estimate_json(e[k]);
            row["f"] = fs[k].name;
            rows.push_back(row);
            ctx.out << "time average[" << fs[k].name << "] = " << fmt(e[k].value) << " +- " << fmt(e[k].std_error) << '\n';
        }
        body["results"] = rows;
    } else if (est == "cycle" || est == "ratio") {
        const auto fs = resolve_functionals(ctx.cfg, ctx.functionals({"one"}));
        json rows = json::array();
        if (est == "ratio") {
            const auto r = estimate_cycle_ratios(fs, params, ctx.cfg.sim);
            for (std::size_t k = 0; k < fs.size(); ++k) {
                rows.push_back({{"f", fs[k].name},
                                {"nu", estimate_json(r[k].nu)},
                                {"top", {{"integral", estimate_json(r[k].top.integral)},
                                         {"duration", estimate_json(r[k].top.duration)}}},
                                {"bottom", {{"integral", estimate_json(r[k].bottom.integral)},
                                            {"duration", estimate_json(r[k].bottom.duration)}}}});
                ctx.out << "cycle ratio[" << fs[k].name << "] = " << fmt(r[k].nu.value) << " +- "
                        << fmt(r[k].nu.std_error) << '\n';
            }
        } else {
            CycleStart start = CycleStart::after_plastic_plus();
            if (ctx.opt.start == "bottom") {
                start = CycleStart::after_plastic_minus();
            } else if (!ctx.opt.start.empty() && ctx.opt.start != "top") {
                const auto [y, z] = parse_point(ctx.opt.start);
                start = CycleStart::at(y, z);
            }
            body["start"] = ctx.opt.start.empty() ? "top" : ctx.opt.start;
            const auto r = estimate_cycles(fs, start, params, ctx.cfg.sim);
            for (std::size_t k = 0; k < fs.size(); ++k) {
                rows.push_back({{"f", fs[k].name},
                                {"integral", estimate_json(r[k].integral)},
                                {"duration", estimate_json(r[k].duration)}});
                ctx.out << "cycle[" << fs[k].name << "] = " << fmt(r[k].integral.value) << " +- "
                        << fmt(r[k].integral.std_error) << ", duration " << fmt(r[k].duration.value) << '\n';
            }
        }
        body["results"] = rows;
    } else if (est == "pi") {
        const auto [y, z] = ctx.opt.start.empty() ? std::pair{0.0, 0.0} : parse_point(ctx.opt.start);
        const auto h = estimate_pi(PhasePoint::interior(y, z, params.Y()), params, ctx.cfg.sim);
        body["start"] = {y, z};
        body["results"] = {{"p_plus", h.p_plus}, {"p_minus", h.p_minus}, {"stderr", h.std_error},
                           {"paths", h.paths}, {"discarded", h.discarded}};
        ctx.out << "pi+ from (" << fmt(y) << "," << fmt(z) << ") = " << fmt(h.p_plus) << " +- " << fmt(h.std_error) << '\n';
    } else if (est == "trajectory") {
        const auto [y, z] = ctx.opt.start.empty() ? std::pair{0.0, 0.0} : parse_point(ctx.opt.start);
        std::ostringstream csv;
        dump_trajectory(csv, params, ctx.cfg.sim, y, z, ctx.opt.steps, ctx.opt.every);
        ctx.write_text("trajectory.csv", csv.str());
        ctx.write_text("plot_trajectory.py",
                       "import pandas as pd\nimport matplotlib.pyplot as plt\n\n"
                       "d = pd.read_csv('trajectory.csv')\n"
                       "fig, ax = plt.subplots(3, 1, sharex=True, figsize=(8, 6))\n"
                       "for a, c in zip(ax, ['y', 'z', 'Delta']):\n"
                       "    a.plot(d.t, d[c], lw=0.6)\n    a.set_ylabel(c)\n"
                       "ax[-1].set_xlabel('t')\n"
                       "fig.savefig('trajectory.png', dpi=150, bbox_inches='tight')\n");
        body["results"] = {{"steps", ctx.opt.steps}, {"every", ctx.opt.every}, {"file", "trajectory.csv"}};
        ctx.out << "trajectory written (" << ctx.opt.steps / ctx.opt.every + 1 << " rows)\n";
    } else {
        throw ValidationError("--estimator must be time, cycle, ratio, pi or trajectory");
    }
    ctx.write_report(body);
}

void cmd_compare(const Context& ctx) {
    const auto grid = ctx.grid();
    const auto params = ctx.cfg.params();
    const auto fs = resolve_functionals(ctx.cfg, ctx.functionals({"y2", "z2", "abs_y"}));
    const ErgodicSolver es(grid, 0.0);
    const auto ta = estimate_time_averages(fs, params, ctx.cfg.sim);
    const auto cr = estimate_cycle_ratios(fs, params, ctx.cfg.sim);
    json rows = json::array();
    bool all = true;
    ctx.out << std::left << std::setw(10) << "f" << std::setw(14) << "PDE" << std::setw(34) << "MC time" << std::setw(34)
            << "MC cycle ratio" << "pass\n";
    for (std::size_t k = 0; k < fs.size(); ++k) {
        const double pde = es.measure(fs[k]).nu;
        const double band_t = 2.0 * ta[k].std_error + 5e-3;
        const double band_c = 2.0 * cr[k].nu.std_error + 5e-3;
        const bool pass_t = std::abs(pde - ta[k].value) <= band_t;
        const bool pass_c = std::abs(pde - cr[k].nu.value) <= band_c && std::abs(ta[k].value - cr[k].nu.value) <= band_c;
        all = all && pass_t && pass_c;
        rows.push_back({{"f", fs[k].name},
                        {"pde", pde},
                        {"time_average", estimate_json(ta[k])},
                        {"cycle_ratio", estimate_json(cr[k].nu)},
                        {"pass_time_average", pass_t},
                        {"pass_cycle_ratio", pass_c}});
        ctx.out << std::setw(10) << fs[k].name << std::setw(14) << fmt(pde) << std::setw(34)
                << (fmt(ta[k].value) + " +- " + fmt(ta[k].std_error)) << std::setw(34)
                << (fmt(cr[k].nu.value) + " +- " + fmt(cr[k].nu.std_error)) << (pass_t && pass_c ? "yes" : "no") << '\n';
    }
    ctx.out << std::right;
    ctx.write_report({{"grid", ctx.grid_meta()}, {"tolerance", "2 stderr + 5e-3"}, {"results", rows}, {"all_pass", all}});
}

void cmd_certify(const Context& ctx) {
    const auto grid = ctx.grid();
    const double s = ctx.cfg.params().sigma_y();
    const double ybar = ctx.cfg.gamma.ybar > 0.0 ? ctx.cfg.gamma.ybar : s;
    std::vector<double> ybar1 = ctx.opt.ybar1_list.empty()
                                    ? std::vector<double>{1.25 * ybar, 1.5 * ybar, 2.0 * ybar, 2.5 * ybar, 3.0 * ybar}
                                    : parse_numbers(ctx.opt.ybar1_list, "ybar1");
    std::sort(ybar1.begin(), ybar1.end());
    json rows = json::array();
    std::vector<std::vector<double>> table;
    double prev = 2.0;
    bool monotone = true;
    for (double y1 : ybar1) {
        const double rho = contraction_factor(grid, ybar, y1);
        monotone = monotone && rho < prev;
        prev = rho;
        rows.push_back({{"ybar", ybar}, {"ybar1", y1}, {"rho", rho}});
        table.push_back({y1, rho});
        ctx.out << "rho(ybar = " << fmt(ybar) << ", ybar1 = " << fmt(y1) << ") = " << fmt(rho) << '\n';
    }
    ctx.write_table("certify", "ybar1,rho", table, "ybar1", "rho", false);
    ctx.write_report({{"grid", ctx.grid_meta()}, {"results", rows}, {"decreasing_in_ybar1", monotone}});
}

void cmd_sweep(const Context& ctx) {
    const std::string kind = ctx.opt.kind;
    const auto params = ctx.cfg.params();
    const auto names = ctx.functionals({"y2"});
    json rows = json::array();
    if (kind == "grid" || kind == "L") {
        if (ctx.opt.levels < 1) throw ValidationError("--levels must be >= 1");
        std::vector<GridConfig> configs;
        GridConfig g = ctx.cfg.grid;
        const int levels = kind == "grid" ? ctx.opt.levels : 2;
        for (int l = 0; l < levels; ++l) {
            configs.push_back(g);
            if (kind == "grid") {
                g.Ny = 2 * g.Ny - 1;
                g.Nz = 2 * g.Nz - 1;
            } else {
                g.L *= 2.0;
                g.Ny = 2 * g.Ny - 1;
            }
        }
        for (const auto& gc : configs) {
            const ErgodicSolver es(build_grid(params, gc), 0.0);
            json vals = json::object();
            for (const auto& f : resolve_functionals(ctx.cfg, names)) vals[f.name] = es.measure(f).nu;
            rows.push_back({{"L", gc.L}, {"Ny", gc.Ny}, {"Nz", gc.Nz}, {"nu", vals},
                            {"v(0-,Y;1)", es.unit_cycle().trace(Junction::top_interior)}});
            ctx.out << "L = " << fmt(gc.L) << ", " << gc.Ny << " x " << gc.Nz << ": " << vals.dump() << '\n';
        }
    } else if (kind == "lambda") {
        const auto grid = ctx.grid();
        const auto lambdas = ctx.opt.lambda_list.empty() ? ctx.cfg.lambdas : parse_numbers(ctx.opt.lambda_list, "lambda");
        const ErgodicSolver limit(grid, 0.0);
        for (const auto& f : resolve_functionals(ctx.cfg, names)) {
            const double nu = limit.measure(f).nu;
            for (double l : lambdas) {
                const double nl = nu_lambda(f, l, grid);
                rows.push_back({{"f", f.name}, {"lambda", l}, {"nu_lambda", nl}, {"nu", nu}, {"gap", std::abs(nl - nu)}});
                ctx.out << "nu_lambda[" << f.name << "](" << fmt(l) << ") = " << fmt(nl) << " (nu = " << fmt(nu) << ")\n";
            }
        }
    } else if (kind == "dt") {
        const auto fs = resolve_functionals(ctx.cfg, names);
        SimConfig sim = ctx.cfg.sim;
        for (int l = 0; l < ctx.opt.levels; ++l) {
            const auto e = estimate_time_averages(fs, params, sim);
            json vals = json::object();
            for (std::size_t k = 0; k < fs.size(); ++k) vals[fs[k].name] = estimate_json(e[k]);
            rows.push_back({{"dt", sim.dt}, {"time_average", vals}});
            ctx.out << "dt = " << fmt(sim.dt) << ": " << fs.front().name << " = " << fmt(e.front().value) << " +- "
                    << fmt(e.front().std_error) << '\n';
            sim.dt *= 0.5;
        }
    } else {
        throw ValidationError("--kind must be grid, L, lambda or dt");
    }
    ctx.write_report({{"kind", kind}, {"results", rows}});
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Invariant measure and ergodic correctors of the elasto-perfectly-plastic oscillator", "epp"};
    app.require_subcommand(1);
    app.fallthrough();
    Options opt;
    app.add_option("--config", opt.config_path, "flat JSON config file");
    app.add_option("--set", opt.overrides, "override a config key: key=value (repeatable)");
    app.add_option("--f", opt.functionals, "comma-separated functional names");
    app.add_option("--seed", opt.seed, "random seed (overrides the config)");
    app.add_option("--out-dir", opt.out_dir, "directory for reports, CSV and plotting scripts");
    app.add_flag("--dump-fields", opt.dump_fields, "also write solution fields as CSV");

    struct Command {
        std::string name;
        std::string help;
        void (*fn)(const Context&);
    };
    const std::vector<Command> commands = {
        {"measure", "invariant measure nu(f) from short-cycle traces", cmd_measure},
        {"cycle", "short-cycle solve, monolithic and/or interior-exterior iteration", cmd_cycle},
        {"resolvent", "resolvent u_lambda, direct vs formula, lambda sweep", cmd_resolvent},
        {"pi", "splitting functions pi+ and pi-", cmd_pi},
        {"simulate", "Monte Carlo estimators", cmd_simulate},
        {"compare", "PDE vs Monte Carlo table", cmd_compare},
        {"certify", "contraction factor sweep over the overlap", cmd_certify},
        {"sweep", "grid, truncation, lambda or dt refinement study", cmd_sweep},
    };
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        if (c.name == "cycle") sub->add_option("--method", opt.method, "monolithic, decomposed or both");
        if (c.name == "resolvent" || c.name == "pi" || c.name == "sweep")
            sub->add_option("--lambda", opt.lambda_list, "comma-separated lambda values");
        if (c.name == "simulate") {
            sub->add_option("--estimator", opt.estimator, "time, cycle, ratio, pi or trajectory");
            sub->add_option("--start", opt.start, "top, bottom or 'y,z'");
            sub->add_option("--steps", opt.steps, "trajectory length in steps");
            sub->add_option("--every", opt.every, "trajectory decimation");
        }
        if (c.name == "certify") sub->add_option("--ybar1", opt.ybar1_list, "comma-separated overlap ends");
        if (c.name == "sweep") {
            sub->add_option("--kind", opt.kind, "grid, L, lambda or dt");
            sub->add_option("--levels", opt.levels, "refinement levels (grid, dt)");
        }
    }

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ExitCode::ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ExitCode::ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << app.help();
        return ExitCode::usage;
    }

    const Command* chosen = nullptr;
    for (const auto& c : commands)
        if (app.got_subcommand(c.name)) chosen = &c;

    try {
        RunConfig cfg = opt.config_path.empty() ? RunConfig{} : load_config(opt.config_path);
        for (const auto& o : opt.overrides) apply_override(cfg, o);
        if (!opt.functionals.empty()) cfg.functionals = split_list(opt.functionals);
        if (opt.seed >= 0) cfg.sim.seed = static_cast<std::uint64_t>(opt.seed);
        cfg.validate();
        const Context ctx(std::move(cfg), opt, chosen->name, out);
        chosen->fn(ctx);
    } catch (const ValidationError& e) {
        err << "invalid input: " << e.what() << '\n';
        return ExitCode::invalid;
    } catch (const SolverError& e) {
        err << "solver failure: " << e.what() << " (achieved " << e.achieved() << ")\n";
        return ExitCode::solver_failure;
    } catch (const std::ios_base::failure& e) {
        err << "i/o failure: " << e.what() << '\n';
        return ExitCode::io_failure;
    }
    return ExitCode::ok;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, out, err);
}

}  // namespace epp::cli
