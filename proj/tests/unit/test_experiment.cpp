#include "hcamg/experiment.hpp"
#include "hcamg/matrix_market.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace hcamg {
namespace {

namespace fs = std::filesystem;

ExperimentConfig config(Problem p, std::vector<index_t> shapes, std::vector<double> sigmas,
                        SolverMode mode = SolverMode::sphcurl) {
    ExperimentConfig cfg;
    cfg.problem = p;
    cfg.shapes = std::move(shapes);
    cfg.sigma_list = std::move(sigmas);
    cfg.mode = mode;
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

TEST(RandomRhs, DeterministicAndInRange) {
    const auto a = random_rhs(5000, 7);
    EXPECT_EQ(a, random_rhs(5000, 7));
    EXPECT_NE(a, random_rhs(5000, 8));
    double mean = 0.0;
    for (double v : a) {
        EXPECT_GT(v, -1.0);
        EXPECT_LT(v, 1.0);
        mean += v;
    }
    EXPECT_LT(std::abs(mean / 5000.0), 0.05);
    // prefixes agree: each entry depends only on its position
    const auto short_b = random_rhs(10, 7);
    EXPECT_TRUE(std::equal(short_b.begin(), short_b.end(), a.begin()));
}

TEST(Validate, RejectsBadFields) {
    auto cfg = config(Problem::model2d_quad, {10}, {});
    EXPECT_THROW(validate(cfg), Error);
    cfg.sigma_list = {0.0};
    EXPECT_THROW(validate(cfg), Error);
    cfg.sigma_list = {1.0};
    EXPECT_NO_THROW(validate(cfg));
    cfg.shapes = {1};
    EXPECT_THROW(validate(cfg), Error);
    cfg.shapes = {10};
    cfg.rtol = 0.0;
    EXPECT_THROW(validate(cfg), Error);
    cfg.rtol = 1e-8;
    cfg.emin.omega = 2.0;
    EXPECT_THROW(validate(cfg), Error);
    cfg.emin.omega = 0.5;
    cfg.coarse_drop_tol = -1.0;
    EXPECT_THROW(validate(cfg), Error);
    cfg.coarse_drop_tol = 0.0;
    cfg.problem = Problem::import_matrices;
    EXPECT_THROW(validate(cfg), Error);
}

TEST(Parsing, NamesRoundTrip) {
    for (auto p : {Problem::model2d_tri, Problem::model2d_quad, Problem::model3d_tet, Problem::model3d_hex,
                   Problem::import_matrices})
        EXPECT_EQ(parse_problem(to_string(p)), p);
    for (auto m : {SolverMode::sphcurl, SolverMode::rsamg, SolverMode::relaxation_only})
        EXPECT_EQ(parse_solver_mode(to_string(m)), m);
    EXPECT_EQ(parse_table_format("csv"), TableFormat::csv);
    EXPECT_FALSE(parse_problem("model4d").has_value());
    EXPECT_FALSE(parse_solver_mode("").has_value());
}

TEST(RunExperiment, QuadIterationsStayFlat) {
    const auto rep = run_experiment(config(Problem::model2d_quad, {28, 82}, {1.0}));
    ASSERT_EQ(rep.runs.size(), 2u);
    for (const auto& r : rep.runs) {
        EXPECT_EQ(r.status, SolveStatus::converged);
        EXPECT_LE(r.relres, 1e-8);
        EXPECT_LE(r.oc, 1.3);
        EXPECT_EQ(r.level_info.size(), r.levels);
    }
    EXPECT_LE(rep.runs[1].iterations, rep.runs[0].iterations + 3);
    EXPECT_EQ(rep.runs[1].edges, 2u * 82u * 81u);
}

TEST(RunExperiment, SmoothedBeatsBaselineOnTriangles) {
    const auto s = run_experiment(config(Problem::model2d_tri, {82}, {1.0}, SolverMode::sphcurl));
    const auto r = run_experiment(config(Problem::model2d_tri, {82}, {1.0}, SolverMode::rsamg));
    EXPECT_LE(s.runs[0].iterations, r.runs[0].iterations);
    for (const auto& l : s.runs[0].level_info) {
        EXPECT_LE(l.null_space_violation, 1e-10);
        EXPECT_LE(l.commutator_residual, 1e-10);
    }
}

TEST(RunExperiment, MultigridBeatsRelaxation) {
    const auto mg = run_experiment(config(Problem::model2d_quad, {50}, {1e-2}));
    const auto rel = run_experiment(config(Problem::model2d_quad, {50}, {1e-2}, SolverMode::relaxation_only));
    EXPECT_EQ(rel.runs[0].levels, 1u);
    EXPECT_EQ(rel.runs[0].oc, 1.0);
    EXPECT_GE(rel.runs[0].iterations, 2 * mg.runs[0].iterations);
}

TEST(RunExperiment, QuadHistogramHasSingleEdgeRows) {
    const auto rep = run_experiment(config(Problem::model2d_quad, {28}, {1.0}));
    const auto& h = rep.runs[0].level_info[0].histogram;
    ASSERT_TRUE(h.count({1, 2}));
    EXPECT_GT(h.at({1, 2}), 0u);
    index_t total = 0;
    for (const auto& [dims, count] : h) total += count;
    EXPECT_EQ(total, rep.runs[0].edges);
}

TEST(Tables, TextCsvAndJsonl) {
    auto rep = run_experiment(config(Problem::model2d_quad, {12}, {1e-2, 1.0}));
    std::ostringstream text, csv, jsonl;
    emit_convergence_table(rep, TableFormat::text, text);
    emit_convergence_table(rep, TableFormat::csv, csv);
    emit_convergence_table(rep, TableFormat::jsonl, jsonl);
    const auto c = csv.str(), j = jsonl.str();
    EXPECT_EQ(text.str().rfind("CG iterations and AMG operator complexity\n", 0), 0u);
    EXPECT_EQ(c.rfind("mesh,edges,sigma,mode,iters,relres,oc,levels\n", 0), 0u);
    EXPECT_EQ(std::count(c.begin(), c.end(), '\n'), 3);
    EXPECT_EQ(std::count(j.begin(), j.end(), '\n'), 2);
    EXPECT_NE(j.find("\"level_info\""), std::string::npos);

    std::ostringstream hist;
    emit_histogram_table(rep, TableFormat::csv, hist);
    EXPECT_EQ(hist.str().rfind("mesh,sigma,mode,level,rows,cols,count\n", 0), 0u);
}

TEST(Tables, CsvIsDeterministic) {
    const auto cfg = config(Problem::model2d_tri, {20}, {1.0, 100.0});
    const auto dir = fs::temp_directory_path() / "hcamg_tables_test";
    fs::remove_all(dir);
    emit_tables(run_experiment(cfg), TableFormat::csv, (dir / "a").string());
    emit_tables(run_experiment(cfg), TableFormat::csv, (dir / "b").string());
    for (const char* f : {"convergence.csv", "histogram.csv"}) {
        const auto a = slurp(dir / "a" / f);
        EXPECT_FALSE(a.empty());
        EXPECT_EQ(a, slurp(dir / "b" / f)) << f;
    }
    fs::remove_all(dir);
}

TEST(Import, SolvesExportedOperatorsAndRefusesBrokenNullSpace) {
    const auto dir = fs::temp_directory_path() / "hcamg_import_test";
    fs::create_directories(dir);
    const auto sys = model_problem(Problem::model2d_tri, 12, 1.0, false);
    write_matrix_market(sys.A_e, (dir / "A_e.mtx").string());
    write_matrix_market(sys.S, (dir / "S.mtx").string());
    write_matrix_market(sys.A_n, (dir / "A_n.mtx").string());
    write_matrix_market(sys.D, (dir / "D.mtx").string());
    auto cfg = config(Problem::import_matrices, {}, {1.0});
    cfg.import_paths = {(dir / "A_e.mtx").string(), (dir / "S.mtx").string(), (dir / "A_n.mtx").string(),
                        (dir / "D.mtx").string()};
    const auto rep = run_experiment(cfg);
    ASSERT_EQ(rep.runs.size(), 1u);
    EXPECT_EQ(rep.runs[0].mesh, "import");
    EXPECT_EQ(rep.runs[0].status, SolveStatus::converged);

    const auto in_memory = run_experiment(config(Problem::model2d_tri, {12}, {1.0}));
    EXPECT_EQ(rep.runs[0].iterations, in_memory.runs[0].iterations);

    write_matrix_market(add(sys.S, SparseMatrix::identity(sys.S.rows()), 1.0, 1e-3), (dir / "S.mtx").string());
    try {
        run_experiment(cfg);
        FAIL() << "no exception";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("refusing"), std::string::npos);
    }
    fs::remove_all(dir);
}

} // namespace
} // namespace hcamg
