#include <gtest/gtest.h>

#include <stabsel/data.hpp>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>

using namespace stabsel;

namespace {

bool same_bits(const Dataset& a, const Dataset& b) {
    return a.x.rows() == b.x.rows() && a.x.cols() == b.x.cols() && std::memcmp(a.x.data(), b.x.data(), sizeof(double) * a.x.size()) == 0 &&
           std::memcmp(a.y.data(), b.y.data(), sizeof(double) * a.y.size()) == 0;
}

} // namespace

TEST(Simulate, DefaultDesignShape) {
    const auto d = simulate(two_signal_spec(0.2, 11));
    EXPECT_EQ(d.n(), 50);
    EXPECT_EQ(d.p(), 500);
    EXPECT_EQ(d.names.front(), "V1");
    EXPECT_EQ(d.names.back(), "V500");
}

TEST(Simulate, DeterministicForFixedSeed) {
    const auto spec = two_signal_spec(0.5, 3);
    EXPECT_TRUE(same_bits(simulate(spec), simulate(spec)));
}

TEST(Simulate, IndependentColumnsWhenRhoZero) {
    auto spec = two_signal_spec(0.0, 5, 10000, 6);
    const auto d = simulate(spec);
    const Eigen::MatrixXd c = d.x.rowwise() - d.x.colwise().mean();
    const Eigen::MatrixXd cov = c.transpose() * c / static_cast<double>(d.n() - 1);
    for (Eigen::Index j = 0; j < 6; ++j)
        for (Eigen::Index k = j + 1; k < 6; ++k) EXPECT_LT(std::abs(cov(j, k) / std::sqrt(cov(j, j) * cov(k, k))), 0.05);
}

TEST(Simulate, Ar1CorrelationMatchesRhoPowers) {
    // Monte Carlo: corr(x_j, x_k) ~ rho^|j-k| with se ~ 1/sqrt(n).
    const double rho = 0.6;
    auto spec = two_signal_spec(rho, 8, 20000, 5);
    const auto d = simulate(spec);
    const Eigen::MatrixXd c = d.x.rowwise() - d.x.colwise().mean();
    const Eigen::MatrixXd cov = c.transpose() * c / static_cast<double>(d.n() - 1);
    for (Eigen::Index k = 1; k < 5; ++k) {
        EXPECT_NEAR(cov(0, k) / std::sqrt(cov(0, 0) * cov(k, k)), std::pow(rho, static_cast<double>(k)), 0.03);
    }
    EXPECT_NEAR(cov(4, 4), 1.0, 0.05);
}

TEST(Simulate, ResponseFollowsLinearModel) {
    auto spec = two_signal_spec(0.3, 2, 40, 20);
    spec.noise_sd = 1e-300;
    const auto d = simulate(spec);
    const Eigen::VectorXd fitted = d.x * spec.beta;
    EXPECT_LT((d.y - fitted).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Simulate, InvalidSpecRejected) {
    auto spec = two_signal_spec(1.2, 1);
    EXPECT_THROW(simulate(spec), ParameterError);
    spec = two_signal_spec(0.5, 1);
    spec.noise_sd = -1;
    EXPECT_THROW(simulate(spec), ParameterError);
}

TEST(SimulateSamples, CountsAndSeeds) {
    const auto spec = two_signal_spec(0.5, 1);
    const auto t = simulate_ar1_samples(spec, 25, 99);
    EXPECT_EQ(t.n(), 25);
    EXPECT_EQ(t.p(), 500);
    EXPECT_EQ(simulate_ar1_samples(spec, 1, 99).n(), 1);
    EXPECT_NE(simulate_ar1_samples(spec, 5, 1).y, simulate_ar1_samples(spec, 5, 2).y);
    EXPECT_THROW(simulate_ar1_samples(spec, 0, 1), ParameterError);
}

TEST(Standardize, HandExample) {
    Eigen::MatrixXd x(3, 2);
    x << 1, 5, 2, 5, 3, 5;
    const auto s = standardize(make_dataset(x, Eigen::Vector3d(1, 2, 3)));
    EXPECT_DOUBLE_EQ(s.x(0, 0), -1.0);
    EXPECT_DOUBLE_EQ(s.x(1, 0), 0.0);
    EXPECT_DOUBLE_EQ(s.x(2, 0), 1.0);
    // constant column
    EXPECT_EQ(s.x.col(1), Eigen::Vector3d::Zero());
    EXPECT_EQ(s.scale(1), 1.0);
    EXPECT_TRUE(s.standardized);
}

TEST(Standardize, IdempotentOnRandomData) {
    std::mt19937_64 eng(4);
    std::normal_distribution<double> z(3.0, 7.0);
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::MatrixXd x(15, 6);
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = z(eng);
        const auto once = standardize(make_dataset(x, Eigen::VectorXd::Zero(15)));
        const auto twice = standardize(once);
        EXPECT_LT((once.x - twice.x).cwiseAbs().maxCoeff(), 1e-10);
        for (Eigen::Index j = 0; j < 6; ++j) {
            EXPECT_NEAR(once.x.col(j).mean(), 0.0, 1e-12);
            EXPECT_NEAR(once.x.col(j).squaredNorm() / 14.0, 1.0, 1e-12);
        }
    }
}

TEST(Standardize, ApplyToHeldOutRows) {
    Eigen::MatrixXd x(4, 1);
    x << 0, 2, 4, 6;
    const auto ref = standardize(make_dataset(x, Eigen::Vector4d::Zero()));
    Eigen::MatrixXd t(1, 1);
    t << 3;
    const auto applied = apply_standardization(make_dataset(t, Eigen::VectorXd::Zero(1)), ref);
    EXPECT_NEAR(applied.x(0, 0), 0.0, 1e-15);
}

TEST(Csv, HandWrittenRoundTrip) {
    const std::string text = "y,a,b\n1.5,2,3e-1\n-4,5,6\n7,8.25,9\n10,11,-1.2E2\n";
    const auto d = parse_csv(text, std::string("y"), true);
    ASSERT_EQ(d.n(), 4);
    ASSERT_EQ(d.p(), 2);
    EXPECT_EQ(d.names, (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(d.y(1), -4.0);
    EXPECT_EQ(d.x(0, 1), 0.3);
    EXPECT_EQ(d.x(3, 1), -120.0);
    const auto again = parse_csv(to_csv(d), std::string("y"), true);
    EXPECT_TRUE(same_bits(d, again));
    EXPECT_EQ(d.names, again.names);
}

TEST(Csv, ResponseByIndexWithoutHeader) {
    const auto d = parse_csv("1,2,3\n4,5,6\n", std::size_t{2}, false);
    EXPECT_EQ(d.y, Eigen::Vector2d(3, 6));
    EXPECT_EQ(d.x(1, 0), 4.0);
    EXPECT_EQ(d.names, (std::vector<std::string>{"V1", "V2"}));
}

TEST(Csv, RoundTripsSimulatedDataExactly) {
    const auto d = simulate(two_signal_spec(0.5, 21, 12, 30));
    const auto path = (std::filesystem::temp_directory_path() / "stabsel_roundtrip.csv").string();
    save_csv(d, path);
    const auto back = load_csv(path, std::string("y"));
    EXPECT_TRUE(same_bits(d, back));
    std::filesystem::remove(path);
}

TEST(Csv, TextCellNamesLocation) {
    try {
        parse_csv("y,a\n1,2\n3,abc\n", std::string("y"), true, "f.csv");
        FAIL() << "expected an ingestion error";
    } catch (const IngestionError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
        EXPECT_NE(msg.find("abc"), std::string::npos) << msg;
        EXPECT_NE(msg.find("column 'a'"), std::string::npos) << msg;
    }
}

TEST(Csv, MissingResponseAndFile) {
    EXPECT_THROW(parse_csv("a,b\n1,2\n", std::string("y"), true), IngestionError);
    EXPECT_THROW(load_csv("/nonexistent/file.csv", std::string("y")), IngestionError);
}

TEST(Holdout, DisjointAndDeterministic) {
    const auto d = simulate(two_signal_spec(0.5, 2, 40, 10));
    const auto [train, test] = holdout_split(d, 0.25, 7);
    EXPECT_EQ(train.n() + test.n(), 40);
    EXPECT_EQ(test.n(), 10);
    const auto again = holdout_split(d, 0.25, 7);
    EXPECT_TRUE(same_bits(test, again.second));
    EXPECT_THROW(holdout_split(d, 1.0, 7), ParameterError);
}
