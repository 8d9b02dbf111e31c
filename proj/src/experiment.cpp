#include "hcamg/experiment.hpp"

#include "hcamg/matrix_market.hpp"

#include <json.hpp>

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace hcamg {

namespace {

constexpr std::array<std::pair<Problem, std::string_view>, 5> kProblems{{
    {Problem::model2d_tri, "model2d_tri"},
    {Problem::model2d_quad, "model2d_quad"},
    {Problem::model3d_tet, "model3d_tet"},
    {Problem::model3d_hex, "model3d_hex"},
    {Problem::import_matrices, "import"},
}};

constexpr std::array<std::pair<SolverMode, std::string_view>, 3> kModes{{
    {SolverMode::sphcurl, "sphcurl"},
    {SolverMode::rsamg, "rsamg"},
    {SolverMode::relaxation_only, "relaxation_only"},
}};

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

std::string mesh_name(Problem p, index_t n) {
    const auto s = std::to_string(n);
    switch (p) {
    case Problem::model2d_tri: return "tri" + s + "x" + s;
    case Problem::model2d_quad: return "quad" + s + "x" + s;
    case Problem::model3d_tet: return "tet" + s + "x" + s + "x" + s;
    case Problem::model3d_hex: return "hex" + s + "x" + s + "x" + s;
    case Problem::import_matrices: return "import";
    }
    return "unknown";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

std::string_view to_string(Problem p) {
    for (const auto& [k, v] : kProblems)
        if (k == p) return v;
    return "unknown";
}

std::string_view to_string(SolverMode m) {
    for (const auto& [k, v] : kModes)
        if (k == m) return v;
    return "unknown";
}

std::optional<Problem> parse_problem(std::string_view s) {
    for (const auto& [k, v] : kProblems)
        if (v == s) return k;
    return std::nullopt;
}

std::optional<SolverMode> parse_solver_mode(std::string_view s) {
    for (const auto& [k, v] : kModes)
        if (v == s) return k;
    return std::nullopt;
}

std::optional<TableFormat> parse_table_format(std::string_view s) {
    if (s == "text") return TableFormat::text;
    if (s == "csv") return TableFormat::csv;
    if (s == "jsonl" || s == "json-lines") return TableFormat::jsonl;
    return std::nullopt;
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.sigma_list.empty()) throw Error("sigma_list must not be empty");
    for (double s : cfg.sigma_list)
        if (!(s > 0.0)) throw Error("sigma values must be positive");
    if (cfg.problem != Problem::import_matrices) {
        if (cfg.shapes.empty()) throw Error("at least one mesh shape is required");
        for (auto n : cfg.shapes)
            if (n < 2) throw Error("mesh shapes must have at least 2 nodes per axis");
    } else {
        const auto& p = cfg.import_paths;
        if (p.A_e.empty() || p.S.empty() || p.A_n.empty() || p.D.empty())
            throw Error("import needs paths for A_e, S, A_n and D");
    }
    if (!(cfg.rtol > 0.0)) throw Error("rtol must be positive");
    if (!(cfg.emin.omega > 0.0 && cfg.emin.omega < 2.0)) throw Error("emin omega must lie in (0, 2)");
    if (cfg.drop_tol < 0.0 || cfg.coarse_drop_tol < 0.0) throw Error("drop tolerances must be nonnegative");
    if (cfg.max_levels < 1) throw Error("max_levels must be at least 1");
}

std::vector<double> random_rhs(index_t n, std::uint64_t seed) {
    std::vector<double> b(n);
    std::uint64_t state = seed;
    for (auto& v : b) {
        // SplitMix64
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        z ^= z >> 31;
        const double u = static_cast<double>(z >> 11) * 0x1.0p-53; // [0, 1)
        v = 2.0 * u - 1.0;
        if (v == -1.0) v = 0.0;
    }
    return b;
}

DiscretizedSystem model_problem(Problem p, index_t n, double sigma, bool dirichlet, Mesh* mesh_out) {
    int dim = 2;
    ElementKind kind = ElementKind::quad;
    switch (p) {
    case Problem::model2d_tri: kind = ElementKind::tri; break;
    case Problem::model2d_quad: kind = ElementKind::quad; break;
    case Problem::model3d_tet: dim = 3; kind = ElementKind::tet; break;
    case Problem::model3d_hex: dim = 3; kind = ElementKind::hex; break;
    case Problem::import_matrices: throw Error("import is not a model problem");
    }
    const std::vector<index_t> shape(dim, n);
    Mesh mesh = build_structured_mesh(dim, kind, shape, dirichlet);
    auto sys = discretize(mesh, sigma);
    if (mesh_out) *mesh_out = std::move(mesh);
    return sys;
}

RunRecord run_case(const std::string& name, const SparseMatrix& a_e, const SparseMatrix& s_e, const SparseMatrix& a_n,
                   const SparseMatrix& d, double sigma, const ExperimentConfig& cfg) {
    RunRecord rec;
    rec.mesh = name;
    rec.edges = a_e.rows();
    rec.sigma = sigma;
    rec.mode = cfg.mode;
    const auto b = random_rhs(a_e.rows(), cfg.seed);

    auto t0 = std::chrono::steady_clock::now();
    if (cfg.mode == SolverMode::relaxation_only) {
        const Level level = make_smoothing_level(a_e, s_e, a_n, d);
        rec.setup_seconds = seconds_since(t0);
        LevelSummary ls;
        ls.edges = a_e.rows();
        ls.nodes = d.cols();
        ls.nnz = a_e.nnz();
        ls.null_space_violation = null_space_violation(s_e, d);
        rec.level_info.push_back(std::move(ls));
        t0 = std::chrono::steady_clock::now();
        const auto result = pcg_solve(
            a_e, b,
            [&level](std::span<const double> r, std::span<double> z) {
                std::fill(z.begin(), z.end(), 0.0);
                hiptmair_smooth(level, z, r);
            },
            cfg.rtol, cfg.maxit);
        rec.solve_seconds = seconds_since(t0);
        rec.iterations = result.iterations;
        rec.relres = result.relative_residual;
        rec.status = result.status;
        return rec;
    }

    HierarchyConfig hc;
    hc.emin = cfg.emin;
    hc.emin.mode = cfg.mode == SolverMode::rsamg ? ProlongatorMode::rsamg : ProlongatorMode::sphcurl;
    hc.nodal.drop_tol = cfg.drop_tol;
    hc.coarse_drop_tol = cfg.coarse_drop_tol;
    hc.coarse_size = cfg.coarse_size;
    hc.max_levels = cfg.max_levels;
    const Hierarchy h(a_e, s_e, a_n, d, hc);
    rec.setup_seconds = seconds_since(t0);
    rec.oc = h.operator_complexity();
    rec.levels = h.num_levels();
    for (const auto& level : h.levels()) {
        LevelSummary ls;
        ls.edges = level.A_e.rows();
        ls.nodes = level.D.cols();
        ls.nnz = level.A_e.nnz();
        ls.null_space_violation = null_space_violation(level.S_e, level.D);
        ls.commutator_residual = level.stats.commutator_residual / level.stats.commutator_scale;
        ls.repaired_rows = level.stats.repaired_rows;
        ls.energy_history = level.stats.energy_history;
        ls.histogram = level.stats.histogram;
        rec.level_info.push_back(std::move(ls));
    }
    t0 = std::chrono::steady_clock::now();
    const auto result = pcg_solve(
        a_e, b, [&h](std::span<const double> r, std::span<double> z) { h.apply(r, z); }, cfg.rtol, cfg.maxit);
    rec.solve_seconds = seconds_since(t0);
    rec.iterations = result.iterations;
    rec.relres = result.relative_residual;
    rec.status = result.status;
    return rec;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    RunReport report;
    if (cfg.problem == Problem::import_matrices) {
        const auto a_e = read_matrix_market(cfg.import_paths.A_e);
        const auto s = read_matrix_market(cfg.import_paths.S);
        const auto a_n = read_matrix_market(cfg.import_paths.A_n);
        const auto d = read_matrix_market(cfg.import_paths.D);
        if (a_e.rows() != a_e.cols() || s.rows() != a_e.rows() || s.cols() != a_e.cols() || d.rows() != a_e.rows() ||
            a_n.rows() != d.cols() || a_n.cols() != d.cols())
            throw DimensionError("imported matrices have inconsistent dimensions");
        const double violation = null_space_violation(s, d);
        if (violation > 1e-10)
            throw Error("imported S and D violate the gradient null space (max|S D|/max|S| = " + fmt("%.3e", violation) +
                        "); refusing to build a hierarchy");
        report.runs.push_back(run_case("import", a_e, s, a_n, d, cfg.sigma_list.front(), cfg));
        return report;
    }
    for (auto n : cfg.shapes)
        for (double sigma : cfg.sigma_list) {
            const auto sys = model_problem(cfg.problem, n, sigma, cfg.dirichlet);
            report.runs.push_back(run_case(mesh_name(cfg.problem, n), sys.A_e, sys.S, sys.A_n, sys.D, sigma, cfg));
        }
    return report;
}

void emit_convergence_table(const RunReport& report, TableFormat format, std::ostream& out) {
    switch (format) {
    case TableFormat::csv:
        out << "mesh,edges,sigma,mode,iters,relres,oc,levels\n";
        for (const auto& r : report.runs)
            out << r.mesh << ',' << r.edges << ',' << fmt("%g", r.sigma) << ',' << to_string(r.mode) << ','
                << r.iterations << ',' << fmt("%.6e", r.relres) << ',' << fmt("%.4f", r.oc) << ',' << r.levels << '\n';
        break;
    case TableFormat::text: {
        out << "CG iterations and AMG operator complexity\n";
        char line[256];
        std::snprintf(line, sizeof line, "%-18s %10s %10s %-16s %6s %12s %7s %6s %-14s\n", "mesh", "#edges", "sigma",
                      "mode", "iters", "relres", "o.c.", "levels", "status");
        out << line;
        for (const auto& r : report.runs) {
            std::snprintf(line, sizeof line, "%-18s %10llu %10g %-16s %6llu %12.3e %7.3f %6llu %-14s\n",
                          r.mesh.c_str(), static_cast<unsigned long long>(r.edges), r.sigma,
                          std::string(to_string(r.mode)).c_str(), static_cast<unsigned long long>(r.iterations),
                          r.relres, r.oc, static_cast<unsigned long long>(r.levels),
                          std::string(to_string(r.status)).c_str());
            out << line;
        }
        break;
    }
    case TableFormat::jsonl:
        for (const auto& r : report.runs) {
            nlohmann::ordered_json j;
            j["mesh"] = r.mesh;
            j["edges"] = r.edges;
            j["sigma"] = r.sigma;
            j["mode"] = to_string(r.mode);
            j["iters"] = r.iterations;
            j["relres"] = r.relres;
            j["oc"] = r.oc;
            j["levels"] = r.levels;
            j["status"] = to_string(r.status);
            auto levels = nlohmann::ordered_json::array();
            for (const auto& l : r.level_info) {
                nlohmann::ordered_json lj;
                lj["edges"] = l.edges;
                lj["nodes"] = l.nodes;
                lj["nnz"] = l.nnz;
                lj["null_space_violation"] = l.null_space_violation;
                lj["commutator_residual"] = l.commutator_residual;
                lj["repaired_rows"] = l.repaired_rows;
                lj["energy_history"] = l.energy_history;
                levels.push_back(std::move(lj));
            }
            j["level_info"] = std::move(levels);
            out << j.dump() << '\n';
        }
        break;
    }
}

void emit_histogram_table(const RunReport& report, TableFormat format, std::ostream& out) {
    switch (format) {
    case TableFormat::csv:
        out << "mesh,sigma,mode,level,rows,cols,count\n";
        for (const auto& r : report.runs)
            for (std::size_t l = 0; l < r.level_info.size(); ++l)
                for (const auto& [dims, count] : r.level_info[l].histogram)
                    out << r.mesh << ',' << fmt("%g", r.sigma) << ',' << to_string(r.mode) << ',' << l << ','
                        << dims.first << ',' << dims.second << ',' << count << '\n';
        break;
    case TableFormat::text:
        out << "Number of least squares problems by block dimension (coarse edges x coarse nodes)\n";
        for (const auto& r : report.runs)
            for (std::size_t l = 0; l < r.level_info.size(); ++l) {
                if (r.level_info[l].histogram.empty()) continue;
                out << r.mesh << " sigma=" << fmt("%g", r.sigma) << " " << to_string(r.mode) << " level " << l << ":";
                for (const auto& [dims, count] : r.level_info[l].histogram)
                    out << "  " << dims.first << "x" << dims.second << ":" << count;
                out << '\n';
            }
        break;
    case TableFormat::jsonl:
        for (const auto& r : report.runs)
            for (std::size_t l = 0; l < r.level_info.size(); ++l)
                for (const auto& [dims, count] : r.level_info[l].histogram) {
                    nlohmann::ordered_json j;
                    j["mesh"] = r.mesh;
                    j["sigma"] = r.sigma;
                    j["mode"] = to_string(r.mode);
                    j["level"] = l;
                    j["rows"] = dims.first;
                    j["cols"] = dims.second;
                    j["count"] = count;
                    out << j.dump() << '\n';
                }
        break;
    }
}

void emit_tables(const RunReport& report, TableFormat format, const std::string& directory) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(directory, ec);
    if (ec) throw Error("cannot create output directory " + directory + ": " + ec.message());
    const char* ext = format == TableFormat::csv ? ".csv" : format == TableFormat::jsonl ? ".jsonl" : ".txt";
    const auto write = [&](const std::string& stem, auto&& emit) {
        const auto path = (fs::path(directory) / (stem + ext)).string();
        std::ofstream out(path);
        if (!out) throw Error("cannot write " + path);
        emit(out);
        if (!out) throw Error("write failed for " + path);
    };
    write("convergence", [&](std::ostream& o) { emit_convergence_table(report, format, o); });
    write("histogram", [&](std::ostream& o) { emit_histogram_table(report, format, o); });
}

} // namespace hcamg
