// Command-line driver: model-problem convergence runs, MatrixMarket import and export.

#include "hcamg/experiment.hpp"
#include "hcamg/matrix_market.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace {

struct Options {
    std::string problem = "model2d_quad";
    std::vector<hcamg::index_t> shapes{28};
    std::vector<double> sigmas{1.0};
    std::string mode = "sphcurl";
    double omega = 0.5;
    hcamg::index_t emin_iterations = 1;
    double rtol = 1e-8;
    hcamg::index_t maxit = 500;
    std::uint64_t seed = 7;
    hcamg::index_t coarse_size = 200;
    hcamg::index_t max_levels = 10;
    double drop_tol = 0.0;
    double coarse_drop_tol = 0.02;
    std::string initial_seed = "zero";
    bool dirichlet = false;
    std::string out;
    std::string format = "text";
    hcamg::ImportPaths paths;
};

void add_solver_options(CLI::App* cmd, Options& o) {
    cmd->add_option("--mode", o.mode, "sphcurl, rsamg or relaxation_only")->capture_default_str();
    cmd->add_option("--omega", o.omega, "damping of the energy-minimization sweep")->capture_default_str();
    cmd->add_option("--emin-iterations", o.emin_iterations, "projected Jacobi sweeps")->capture_default_str();
    cmd->add_option("--rtol", o.rtol, "relative residual tolerance")->capture_default_str();
    cmd->add_option("--maxit", o.maxit, "CG iteration limit")->capture_default_str();
    cmd->add_option("--seed", o.seed, "seed of the random right-hand side")->capture_default_str();
    cmd->add_option("--coarse-size", o.coarse_size, "edge count at which coarsening stops")->capture_default_str();
    cmd->add_option("--max-levels", o.max_levels)->capture_default_str();
    cmd->add_option("--drop-tol", o.drop_tol, "strength-of-connection threshold on the finest level")
        ->capture_default_str();
    cmd->add_option("--coarse-drop-tol", o.coarse_drop_tol, "strength-of-connection threshold on coarser levels")
        ->capture_default_str();
    cmd->add_option("--initial-seed", o.initial_seed, "zero or ones, values on the pattern before the least-norm fix")
        ->capture_default_str();
    cmd->add_option("--out", o.out, "directory for convergence/histogram tables (stdout if empty)");
    cmd->add_option("--format", o.format, "text, csv or jsonl")->capture_default_str();
}

hcamg::ExperimentConfig to_config(const Options& o) {
    hcamg::ExperimentConfig cfg;
    const auto problem = hcamg::parse_problem(o.problem);
    if (!problem) throw hcamg::Error("unknown problem '" + o.problem + "'");
    const auto mode = hcamg::parse_solver_mode(o.mode);
    if (!mode) throw hcamg::Error("unknown mode '" + o.mode + "'");
    cfg.problem = *problem;
    cfg.mode = *mode;
    cfg.shapes = o.shapes;
    cfg.sigma_list = o.sigmas;
    cfg.emin.omega = o.omega;
    cfg.emin.iterations = o.emin_iterations;
    cfg.rtol = o.rtol;
    cfg.maxit = o.maxit;
    cfg.seed = o.seed;
    cfg.coarse_size = o.coarse_size;
    cfg.max_levels = o.max_levels;
    cfg.drop_tol = o.drop_tol;
    cfg.coarse_drop_tol = o.coarse_drop_tol;
    if (o.initial_seed == "zero")
        cfg.emin.seed = hcamg::InitialSeed::zero;
    else if (o.initial_seed == "ones")
        cfg.emin.seed = hcamg::InitialSeed::ones;
    else
        throw hcamg::Error("unknown initial seed '" + o.initial_seed + "'");
    cfg.dirichlet = o.dirichlet;
    cfg.import_paths = o.paths;
    return cfg;
}

void report(const hcamg::RunReport& rep, const Options& o) {
    const auto format = hcamg::parse_table_format(o.format);
    if (!format) throw hcamg::Error("unknown format '" + o.format + "'");
    if (o.out.empty()) {
        hcamg::emit_convergence_table(rep, *format, std::cout);
        hcamg::emit_histogram_table(rep, *format, std::cout);
    } else {
        hcamg::emit_tables(rep, *format, o.out);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structure-preserving algebraic multigrid for H(curl) systems"};
    app.set_config("--config", "", "flat key=value configuration file");
    app.require_subcommand(1);
    Options o;

    auto* solve = app.add_subcommand("solve", "run model-problem convergence experiments");
    solve->add_option("--problem", o.problem, "model2d_tri, model2d_quad, model3d_tet or model3d_hex")
        ->capture_default_str();
    solve->add_option("--shape", o.shapes, "nodes per axis (repeatable or comma separated)")
        ->delimiter(',')
        ->capture_default_str();
    solve->add_option("--sigma", o.sigmas, "mass coefficient (repeatable or comma separated)")
        ->delimiter(',')
        ->capture_default_str();
    solve->add_flag("--dirichlet", o.dirichlet, "flag every boundary node as Dirichlet");
    add_solver_options(solve, o);

    auto* imp = app.add_subcommand("import", "solve with MatrixMarket operators");
    imp->add_option("--Ae", o.paths.A_e, "edge operator S + M")->required();
    imp->add_option("--S", o.paths.S, "curl-curl operator")->required();
    imp->add_option("--An", o.paths.A_n, "nodal operator")->required();
    imp->add_option("--D", o.paths.D, "discrete gradient (edges x nodes)")->required();
    add_solver_options(imp, o);

    std::string export_dir = "matrices";
    auto* exp = app.add_subcommand("export", "write model-problem operators as MatrixMarket files");
    exp->add_option("--problem", o.problem)->capture_default_str();
    exp->add_option("--shape", o.shapes)->delimiter(',')->capture_default_str();
    exp->add_option("--sigma", o.sigmas)->delimiter(',')->capture_default_str();
    exp->add_flag("--dirichlet", o.dirichlet);
    exp->add_option("--dir", export_dir, "output directory")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve) {
            report(hcamg::run_experiment(to_config(o)), o);
        } else if (*imp) {
            o.problem = "import";
            report(hcamg::run_experiment(to_config(o)), o);
        } else if (*exp) {
            const auto problem = hcamg::parse_problem(o.problem);
            if (!problem || *problem == hcamg::Problem::import_matrices)
                throw hcamg::Error("unknown model problem '" + o.problem + "'");
            if (o.shapes.empty() || o.sigmas.empty()) throw hcamg::Error("export needs one shape and one sigma");
            const auto sys = hcamg::model_problem(*problem, o.shapes.front(), o.sigmas.front(), o.dirichlet);
            std::filesystem::create_directories(export_dir);
            const std::filesystem::path dir(export_dir);
            hcamg::write_matrix_market(sys.A_e, (dir / "Ae.mtx").string());
            hcamg::write_matrix_market(sys.S, (dir / "S.mtx").string());
            hcamg::write_matrix_market(sys.A_n, (dir / "An.mtx").string());
            hcamg::write_matrix_market(sys.D, (dir / "D.mtx").string());
            std::cout << "wrote Ae.mtx S.mtx An.mtx D.mtx to " << export_dir << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
