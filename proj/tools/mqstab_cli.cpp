// Command-line front end: benchmark runs, inf-sup sweeps, convergence and
// conditioning studies, with CSV output for plotting.

#include "mqstab/benchmarks.hpp"
#include "mqstab/infsup.hpp"
#include "mqstab/linalg.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

using namespace mqstab;

constexpr int kExitOk = 0;
constexpr int kExitArgument = 1;
constexpr int kExitNumerical = 2;

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, v);
    return buf;
}

std::string opt_fmt(const std::optional<double>& v, const char* format = "%.6g") {
    return v ? fmt(format, *v) : std::string{};
}

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / name);
    if (!out) throw std::runtime_error("cannot open output file: " + (dir / name).string());
    return out;
}

// Ordered parallel map: results come back in case order regardless of the
// worker count, so CSV output stays deterministic.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
    threads = std::max(1, threads);
    if (threads == 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

struct CommonOptions {
    int test = 0;
    std::string method = "mq";
    std::vector<int> degree;
    std::vector<int> elements;
    int levels = -1;
    double cb = -1.0;
    int grid = 256;
    std::string out = ".";
    int threads = 1;
};

std::array<int, 2> resolve_degree(const bench::TestCase& tc, const std::vector<int>& degree) {
    std::array<int, 2> p = tc.default_degree;
    if (!degree.empty()) {
        p[0] = degree[0];
        p[1] = degree.size() > 1 ? degree[1] : degree[0];
    }
    return p;
}

std::array<int, 2> resolve_elements(const bench::TestCase& tc, const std::vector<int>& elements) {
    std::array<int, 2> ne = tc.default_elements;
    if (!elements.empty()) {
        ne[0] = elements[0];
        ne[1] = elements.size() > 1 ? elements[1] : elements[0];
    }
    return ne;
}

Method resolve_method(const std::string& name) {
    const auto m = method_from_string(name);
    if (!m) throw std::invalid_argument("unknown method: " + name);
    return *m;
}

std::string meta_line(const std::string& cmd, const bench::TestCase& tc, Method method,
                      std::array<int, 2> p, std::array<int, 2> ne, int levels, double cb,
                      int grid, int threads) {
    std::ostringstream os;
    os << "# mqstab " << cmd << " test=" << tc.id << " method=" << to_string(method)
       << " p1=" << p[0] << " p2=" << (tc.dimension() == 2 ? std::to_string(p[1]) : "-")
       << " ne1=" << ne[0] << " ne2=" << (tc.dimension() == 2 ? std::to_string(ne[1]) : "-")
       << " L=" << levels << " cb=" << fmt("%.6g", cb) << " grid=" << grid
       << " threads=" << threads;
    return os.str();
}

void write_report_row(std::ostream& os, const bench::BenchmarkReport& r, int dim) {
    os << r.test << ',' << to_string(r.method) << ',' << r.degree[0] << ','
       << (dim == 2 ? std::to_string(r.degree[1]) : "") << ',' << r.elements[0] << ','
       << (dim == 2 ? std::to_string(r.elements[1]) : "") << ',' << r.levels << ','
       << fmt("%.6g", r.cb) << ',' << opt_fmt(r.rel_l2) << ',' << opt_fmt(r.rel_h1) << ','
       << opt_fmt(r.min_indicator) << ',' << opt_fmt(r.diff_indicator) << ','
       << opt_fmt(r.condition) << ',' << r.dofs << ',' << fmt("%.3f", r.seconds) << '\n';
}

int cmd_infsup(const std::vector<int>& degrees, const std::vector<int>& levels,
               const std::vector<int>& elements, const std::string& out, int threads) {
    struct Case {
        int p, L, n;
    };
    std::vector<Case> cases;
    for (const int p : degrees)
        for (const int L : levels)
            for (const int n : elements) cases.push_back({p, L, n});

    std::vector<std::optional<double>> beta(cases.size());
    std::vector<std::string> errors(cases.size());
    parallel_for(static_cast<int>(cases.size()), threads, [&](int i) {
        const auto& c = cases[static_cast<std::size_t>(i)];
        try {
            beta[static_cast<std::size_t>(i)] = compute_infsup(c.p, c.L, c.n);
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(i)] = e.what();
        }
    });

    auto os = open_output(out, "infsup.csv");
    os << "# mqstab infsup degrees=";
    for (std::size_t i = 0; i < degrees.size(); ++i) os << (i ? ";" : "") << degrees[i];
    os << " levels=";
    for (std::size_t i = 0; i < levels.size(); ++i) os << (i ? ";" : "") << levels[i];
    os << " elements=";
    for (std::size_t i = 0; i < elements.size(); ++i) os << (i ? ";" : "") << elements[i];
    os << " threads=" << threads << '\n';
    os << "p,L,n,beta\n";
    int written = 0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        if (beta[i]) {
            os << cases[i].p << ',' << cases[i].L << ',' << cases[i].n << ','
               << fmt("%.4f", *beta[i]) << '\n';
            ++written;
        } else {
            std::cerr << "infsup: skipping p=" << cases[i].p << " L=" << cases[i].L
                      << " n=" << cases[i].n << ": " << errors[i] << '\n';
        }
    }
    if (written == 0 && !cases.empty()) {
        std::cerr << "infsup: all cases failed\n";
        return kExitArgument;
    }
    return kExitOk;
}

int cmd_run(const CommonOptions& opt) {
    const bench::TestCase tc = bench::make_test_case(opt.test);
    const Method method = resolve_method(opt.method);
    const std::array<int, 2> p = resolve_degree(tc, opt.degree);
    const std::array<int, 2> ne = resolve_elements(tc, opt.elements);
    const int levels = opt.levels > 0 ? opt.levels : tc.default_levels(std::max(p[0], p[1]));
    const double cb = opt.cb >= 0.0 ? opt.cb : tc.default_cb;

    std::optional<bench::DiscreteSolution> sol;
    const bench::BenchmarkReport rep =
        bench::run_case(tc, method, p, ne, levels, cb, /*condition_dim_limit=*/1000, &sol);

    const std::string meta = meta_line("run", tc, method, p, ne, levels, cb, opt.grid, opt.threads);
    {
        auto os = open_output(opt.out, "report.csv");
        os << meta << '\n';
        os << "test,method,p1,p2,ne1,ne2,L,cb,rel_l2,rel_h1,min,diff,cond,dofs,seconds\n";
        write_report_row(os, rep, tc.dimension());
    }
    {
        auto os = open_output(opt.out, "solution.csv");
        os << meta << '\n';
        os << (tc.dimension() == 2 ? "x,y,u\n" : "x,u\n");
        const Eigen::MatrixXd samples = bench::sample_solution(*sol, opt.grid);
        for (Eigen::Index r = 0; r < samples.rows(); ++r) {
            for (Eigen::Index c = 0; c < samples.cols(); ++c)
                os << (c ? "," : "") << fmt("%.12g", samples(r, c));
            os << '\n';
        }
    }
    return kExitOk;
}

int cmd_convergence(const CommonOptions& opt, const std::vector<int>& meshes) {
    const bench::TestCase tc = bench::make_test_case(opt.test);
    const Method method = resolve_method(opt.method);
    const std::array<int, 2> p = resolve_degree(tc, opt.degree);
    const int levels = opt.levels > 0 ? opt.levels : tc.default_levels(std::max(p[0], p[1]));
    const double cb = opt.cb >= 0.0 ? opt.cb : tc.default_cb;
    if (meshes.empty()) throw std::invalid_argument("mesh list required");
    if (!tc.problem.exact)
        throw std::invalid_argument("convergence: benchmark " + std::to_string(tc.id) +
                                    " has no exact solution");

    // solve the meshes concurrently, then chain the rates in order
    std::vector<bench::BenchmarkReport> reps(meshes.size());
    std::vector<std::exception_ptr> errs(meshes.size());
    parallel_for(static_cast<int>(meshes.size()), opt.threads, [&](int i) {
        try {
            reps[static_cast<std::size_t>(i)] =
                bench::run_case(tc, method, p, bench::mesh_elements(tc, meshes[static_cast<std::size_t>(i)]),
                                levels, cb, /*condition_dim_limit=*/0);
        } catch (...) {
            errs[static_cast<std::size_t>(i)] = std::current_exception();
        }
    });
    for (const auto& e : errs)
        if (e) std::rethrow_exception(e);
    for (std::size_t i = 1; i < reps.size(); ++i) {
        if (reps[i - 1].rel_l2 && reps[i].rel_l2 && *reps[i].rel_l2 > 0.0) {
            reps[i].rate_l2 = std::log2(*reps[i - 1].rel_l2 / *reps[i].rel_l2);
            reps[i].rate_h1 = std::log2(*reps[i - 1].rel_h1 / *reps[i].rel_h1);
        }
    }

    auto os = open_output(opt.out, "convergence.csv");
    os << meta_line("convergence", tc, method, p, bench::mesh_elements(tc, meshes.front()),
                    levels, cb, opt.grid, opt.threads)
       << " meshes=";
    for (std::size_t i = 0; i < meshes.size(); ++i) os << (i ? ";" : "") << meshes[i];
    os << '\n';
    os << "test,method,p1,p2,ne1,ne2,L,cb,rel_l2,rate_l2,rel_h1,rate_h1,dofs,seconds\n";
    for (const auto& r : reps) {
        os << r.test << ',' << to_string(r.method) << ',' << r.degree[0] << ','
           << (tc.dimension() == 2 ? std::to_string(r.degree[1]) : "") << ',' << r.elements[0]
           << ',' << (tc.dimension() == 2 ? std::to_string(r.elements[1]) : "") << ','
           << r.levels << ',' << fmt("%.6g", r.cb) << ',' << opt_fmt(r.rel_l2) << ','
           << opt_fmt(r.rate_l2, "%.2f") << ',' << opt_fmt(r.rel_h1) << ','
           << opt_fmt(r.rate_h1, "%.2f") << ',' << r.dofs << ',' << fmt("%.3f", r.seconds)
           << '\n';
    }
    return kExitOk;
}

int cmd_condition(const CommonOptions& opt, const std::vector<int>& meshes,
                  const std::vector<std::string>& method_names) {
    const bench::TestCase tc = bench::make_test_case(opt.test);
    const std::array<int, 2> p = resolve_degree(tc, opt.degree);
    const int levels = opt.levels > 0 ? opt.levels : tc.default_levels(std::max(p[0], p[1]));
    const double cb = opt.cb >= 0.0 ? opt.cb : tc.default_cb;
    if (meshes.empty()) throw std::invalid_argument("mesh list required");

    std::vector<Method> methods;
    for (const auto& name : method_names) methods.push_back(resolve_method(name));

    struct Case {
        Method method;
        int mesh;
    };
    std::vector<Case> cases;
    for (const Method m : methods)
        for (const int mesh : meshes) cases.push_back({m, mesh});

    std::vector<bench::BenchmarkReport> reps(cases.size());
    std::vector<std::exception_ptr> errs(cases.size());
    parallel_for(static_cast<int>(cases.size()), opt.threads, [&](int i) {
        try {
            const auto& c = cases[static_cast<std::size_t>(i)];
            auto out = bench::condition_sweep(tc, p, {c.mesh}, {c.method}, levels, cb);
            reps[static_cast<std::size_t>(i)] = out.at(0);
        } catch (...) {
            errs[static_cast<std::size_t>(i)] = std::current_exception();
        }
    });
    for (const auto& e : errs)
        if (e) std::rethrow_exception(e);

    auto os = open_output(opt.out, "condition.csv");
    os << meta_line("condition", tc, methods.front(), p, bench::mesh_elements(tc, meshes.front()),
                    levels, cb, opt.grid, opt.threads)
       << " meshes=";
    for (std::size_t i = 0; i < meshes.size(); ++i) os << (i ? ";" : "") << meshes[i];
    os << " methods=";
    for (std::size_t i = 0; i < methods.size(); ++i) os << (i ? ";" : "") << to_string(methods[i]);
    os << '\n';
    os << "test,method,p1,p2,ne1,ne2,L,cb,dofs,cond,seconds\n";
    for (const auto& r : reps) {
        if (!r.condition)
            std::cerr << "condition: system with " << r.dofs
                      << " dofs exceeds the dense-SVD bound, skipped\n";
        os << r.test << ',' << to_string(r.method) << ',' << r.degree[0] << ','
           << (tc.dimension() == 2 ? std::to_string(r.degree[1]) : "") << ',' << r.elements[0]
           << ',' << (tc.dimension() == 2 ? std::to_string(r.elements[1]) : "") << ','
           << r.levels << ',' << fmt("%.6g", r.cb) << ',' << r.dofs << ','
           << opt_fmt(r.condition) << ',' << fmt("%.3f", r.seconds) << '\n';
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"B-spline Galerkin solver for advection-dominated problems with "
                 "multilevel quasi-interpolant projection stabilization"};
    app.require_subcommand(1);

    CommonOptions opt;
    std::vector<int> infsup_degrees{2, 3};
    std::vector<int> infsup_levels{1, 2, 3};
    std::vector<int> infsup_elements{8, 16, 32, 64, 128, 256, 512};
    std::vector<std::string> condition_methods{"galerkin", "supg", "mq"};

    auto* sc_infsup = app.add_subcommand(
        "infsup", "Compute discrete inf-sup constants over (degree, level, mesh) grids");
    sc_infsup->add_option("--degree", infsup_degrees, "degrees p (comma separated)")
        ->delimiter(',');
    sc_infsup->add_option("--levels", infsup_levels, "coarsening levels L (comma separated)")
        ->delimiter(',');
    sc_infsup->add_option("--elements", infsup_elements, "fine element counts (comma separated)")
        ->delimiter(',');
    sc_infsup->add_option("--out", opt.out, "output directory");
    sc_infsup->add_option("--threads", opt.threads, "worker threads for the sweep");

    const auto add_common = [&](CLI::App* sc, bool with_method = true) {
        sc->add_option("--test", opt.test, "benchmark id 1..6")->required();
        if (with_method)
            sc->add_option("--method", opt.method, "galerkin|supg|gls|mq|mq-iso");
        sc->add_option("--degree", opt.degree, "degree p1[,p2]")->delimiter(',');
        sc->add_option("--levels", opt.levels, "stabilization levels L");
        sc->add_option("--cb", opt.cb, "tau_h = cb * h scaling");
        sc->add_option("--grid", opt.grid, "sampling grid size");
        sc->add_option("--out", opt.out, "output directory");
        sc->add_option("--threads", opt.threads, "worker threads for sweeps");
    };

    auto* sc_run = app.add_subcommand("run", "Solve one benchmark configuration");
    add_common(sc_run);
    sc_run->add_option("--elements", opt.elements, "elements n1[,n2]")->delimiter(',');

    std::vector<int> meshes;
    auto* sc_conv = app.add_subcommand("convergence", "Error sweep over a dyadic mesh family");
    add_common(sc_conv);
    sc_conv->add_option("--elements", meshes, "mesh list (comma separated)")->delimiter(',');

    auto* sc_cond = app.add_subcommand("condition", "Condition-number sweep");
    add_common(sc_cond, false);
    sc_cond->add_option("--elements", meshes, "mesh list (comma separated)")->delimiter(',');
    sc_cond->add_option("--method", condition_methods, "methods (comma separated)")
        ->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitArgument;
    }

    try {
        if (sc_infsup->parsed())
            return cmd_infsup(infsup_degrees, infsup_levels, infsup_elements, opt.out, opt.threads);
        if (sc_run->parsed()) return cmd_run(opt);
        if (sc_conv->parsed()) return cmd_convergence(opt, meshes);
        if (sc_cond->parsed()) return cmd_condition(opt, meshes, condition_methods);
    } catch (const linalg::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        std::cerr << "run '" << argv[0] << " --help' for usage\n";
        return kExitArgument;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitArgument;
}
