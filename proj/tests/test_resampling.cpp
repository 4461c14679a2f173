#include <gtest/gtest.h>

#include <stabsel/resampling.hpp>

#include "oracles.hpp"

#include <random>
#include <set>

using namespace stabsel;

namespace {

Dataset small_problem(std::uint64_t seed, Eigen::Index n = 21, Eigen::Index p = 12) {
    auto spec = two_signal_spec(0.4, seed, n, p);
    return standardize(simulate(spec));
}

} // namespace

TEST(SelectionMatrix, FrequenciesAndAverage) {
    const auto m = SelectionMatrix::from_dense({{1, 0, 0}, {1, 0, 0}, {1, 1, 0}, {1, 0, 0}});
    const auto f = selection_frequencies(m);
    EXPECT_EQ(f.freq, (std::vector<double>{1.0, 0.25, 0.0}));
    EXPECT_EQ(average_selected(m), 1.25);
    EXPECT_EQ(selection_frequencies(SelectionMatrix::from_dense({{1}, {0}, {1}, {0}})).freq[0], 0.5);
    EXPECT_EQ(average_selected(SelectionMatrix::from_dense({{0, 0}, {0, 0}})), 0.0);
    EXPECT_EQ(average_selected(SelectionMatrix::from_dense({{1, 1, 1}, {1, 1, 1}})), 3.0);
}

TEST(SelectionMatrix, FrequenciesAreExactColumnMeans) {
    std::mt19937_64 eng(5);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t B = 2 + eng() % 15, p = 1 + eng() % 8;
        const auto dense = oracle::random_binary(B, p, 0.4, eng);
        const auto f = selection_frequencies(SelectionMatrix::from_dense(dense));
        for (std::size_t j = 0; j < p; ++j) {
            oracle::Rational mean(0);
            for (const auto& row : dense) mean = mean + oracle::Rational(row[j], static_cast<__int128>(B));
            EXPECT_EQ(f.freq[j], mean.to_double());
        }
    }
}

TEST(SelectionMatrix, FirstRowsAndEntries) {
    const auto m = SelectionMatrix::from_dense({{0, 1, 1}, {1, 0, 0}, {0, 0, 1}});
    EXPECT_TRUE(m.entry(0, 2));
    EXPECT_FALSE(m.entry(1, 2));
    const auto head = m.first_rows(2);
    EXPECT_EQ(head.B(), 2u);
    EXPECT_EQ(head.column_counts(), (std::vector<std::uint64_t>{1, 1, 1}));
    EXPECT_THROW(m.first_rows(4), ParameterError);
}

TEST(SelectionMatrix, AuditCsvRoundTrip) {
    const auto m = SelectionMatrix::from_dense({{0, 1, 1}, {1, 0, 0}, {0, 0, 0}}, 0.5);
    const std::vector<std::string> names{"a", "b,c", "d"};
    const auto text = selection_matrix_csv(m, names);
    const auto [back, back_names] = parse_selection_matrix_csv(text, 0.5);
    EXPECT_EQ(back_names, names);
    ASSERT_EQ(back.B(), 3u);
    for (std::size_t b = 0; b < 3; ++b)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(back.entry(b, j), m.entry(b, j));
    EXPECT_THROW(parse_selection_matrix_csv("a,b\n1,2\n", 1.0), IngestionError);
}

TEST(Subsample, HalfSizeDistinctDeterministic) {
    for (Eigen::Index n : {4, 7, 50}) {
        const auto s = draw_subsample(n, 3, 1);
        EXPECT_EQ(static_cast<Eigen::Index>(s.size()), n / 2);
        EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
        EXPECT_EQ(std::set<Eigen::Index>(s.begin(), s.end()).size(), s.size());
        EXPECT_GE(s.front(), 0);
        EXPECT_LT(s.back(), n);
        EXPECT_EQ(s, draw_subsample(n, 3, 1));
    }
    EXPECT_NE(draw_subsample(50, 3, 1), draw_subsample(50, 3, 2));
}

TEST(Subsample, InclusionIsUniform) {
    // Each row appears in a half-size subsample with probability 1/2.
    const int draws = 4000;
    std::vector<int> hits(20, 0);
    for (int b = 0; b < draws; ++b)
        for (auto i : draw_subsample(20, 11, static_cast<std::uint64_t>(b))) ++hits[static_cast<std::size_t>(i)];
    for (int h : hits) EXPECT_NEAR(h / static_cast<double>(draws), 0.5, 0.04);
}

TEST(Resampling, ShapeAndSharedSubsamples) {
    const auto d = small_problem(1);
    const auto grid = make_grid(d, 10, 0.05);
    const auto run = run_stability_selection(d, grid, 20, 9);
    ASSERT_EQ(run.matrices.size(), 10u);
    const auto* first = run.matrices.front().subsample_indices();
    ASSERT_NE(first, nullptr);
    for (const auto& m : run.matrices) {
        EXPECT_EQ(m.B(), 20u);
        EXPECT_EQ(m.p(), 12u);
        EXPECT_EQ(*m.subsample_indices(), *first);
    }
    for (const auto& s : *first) EXPECT_EQ(s.size(), 10u);
}

TEST(Resampling, RowsMatchIndependentFits) {
    const auto d = small_problem(2);
    const auto grid = make_grid(d, 6, 0.05);
    const auto run = run_stability_selection(d, grid, 8, 4);
    const auto& subs = *run.matrices.front().subsample_indices();
    for (std::size_t b = 0; b < 8; ++b) {
        for (std::size_t l = 0; l < grid.size(); ++l) {
            LassoSolver cold(d, subs[b], resampling_lasso_options());
            const auto fit = cold.solve(grid[l]);
            for (std::size_t j = 0; j < 12; ++j) {
                // warm and cold agree to tol, so only coefficients clear of 0 are compared.
                const double c = fit.coefficients(static_cast<Eigen::Index>(j));
                if (std::abs(c) > 1e-5) {
                    EXPECT_TRUE(run.matrices[l].entry(b, j)) << b << ' ' << l << ' ' << j;
                }
            }
        }
    }
}

TEST(Resampling, NullMatrixAboveEverySubsampleLambdaMax) {
    const auto d = small_problem(3);
    const auto grid = LambdaGrid::user({1e6, 1e5});
    const auto run = run_stability_selection(d, grid, 10, 1);
    for (const auto& m : run.matrices) EXPECT_EQ(m.total(), 0u);
}

TEST(Resampling, ThreadCountDoesNotChangeOutput) {
    const auto d = small_problem(4, 30, 40);
    const auto grid = make_grid(d, 15, 0.02);
    ResamplingOptions one, many;
    many.threads = 8;
    one.retain_fits = many.retain_fits = true;
    const auto a = run_stability_selection(d, grid, 25, 77, one);
    const auto b = run_stability_selection(d, grid, 25, 77, many);
    for (std::size_t l = 0; l < grid.size(); ++l) {
        for (std::size_t r = 0; r < 25; ++r) {
            const auto x = a.matrices[l].row(r), y = b.matrices[l].row(r);
            EXPECT_TRUE(std::equal(x.begin(), x.end(), y.begin(), y.end()));
            EXPECT_EQ(a.fits->at(l, r).value, b.fits->at(l, r).value);
        }
    }
}

TEST(Resampling, PerLambdaModeDrawsFreshSubsamples) {
    const auto d = small_problem(5);
    const auto grid = make_grid(d, 4, 0.1);
    ResamplingOptions opt;
    opt.mode = SubsampleMode::per_lambda;
    const auto run = run_stability_selection(d, grid, 10, 3, opt);
    EXPECT_NE(*run.matrices[0].subsample_indices(), *run.matrices[1].subsample_indices());
    const auto shared = run_stability_selection(d, grid, 10, 3);
    EXPECT_NE(*run.matrices[0].subsample_indices(), *shared.matrices[0].subsample_indices());
}

TEST(Resampling, InvalidArguments) {
    const auto d = small_problem(6);
    const auto grid = make_grid(d, 4, 0.1);
    EXPECT_THROW(run_stability_selection(d, grid, 1, 1), ParameterError);
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 5);
    EXPECT_THROW(run_stability_selection(make_dataset(x, Eigen::Vector3d(1, 2, 3)), grid, 5, 1), ParameterError);
}

TEST(Accuracy, NullFitsGiveCenteredTestError) {
    const auto d = small_problem(7);
    const auto grid = LambdaGrid::user({1e6, 1e5});
    ResamplingOptions opt;
    opt.retain_fits = true;
    const auto run = run_stability_selection(d, grid, 6, 2, opt);
    const auto test = standardize(simulate(two_signal_spec(0.4, 99, 9, 12)));
    const auto acc = evaluate_mse(d, grid, *run.fits, test);
    // With every coefficient zero the prediction is the subsample mean of y.
    double expected = 0.0;
    for (const auto& rows : *run.matrices[0].subsample_indices()) {
        double ybar = 0.0;
        for (auto i : rows) ybar += d.y(i);
        ybar /= static_cast<double>(rows.size());
        expected += (test.y.array() - ybar).square().mean();
    }
    expected /= 6.0;
    EXPECT_NEAR(acc.mse[0], expected, 1e-12);
    EXPECT_NEAR(acc.mse[1], expected, 1e-12);
    EXPECT_EQ(acc.n_test, 9u);
}

TEST(Accuracy, NoiselessCopyOfFitSubsampleIsNearZero) {
    auto spec = two_signal_spec(0.4, 8, 40, 6);
    spec.noise_sd = 1e-9;
    const auto d = simulate(spec);
    const auto grid = LambdaGrid::user({1e-3, 1e-6});
    ResamplingOptions opt;
    opt.retain_fits = true;
    const auto run = run_stability_selection(d, grid, 4, 2, opt);
    const auto acc = evaluate_mse(d, grid, *run.fits, simulate_ar1_samples(spec, 30, 5));
    EXPECT_LT(acc.mse[1], 1e-8);
    EXPECT_LT(acc.mse[1], acc.mse[0]);
}

TEST(Accuracy, ColumnMismatchRejected) {
    const auto d = small_problem(9);
    const auto grid = make_grid(d, 3, 0.1);
    ResamplingOptions opt;
    opt.retain_fits = true;
    const auto run = run_stability_selection(d, grid, 4, 2, opt);
    EXPECT_THROW(evaluate_mse(d, grid, *run.fits, simulate(two_signal_spec(0.4, 1, 5, 11))), ParameterError);
}
