#include "monoglm/design.hpp"
#include "monoglm/error.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

using namespace monoglm;

namespace {

OrderedFactor factor(std::string name, std::vector<std::string> levels,
                     Direction direction = Direction::nondecreasing) {
    return {std::move(name), std::move(levels), direction};
}

ObservationTable csv(const std::string& text) {
    std::istringstream in(text);
    return ObservationTable::from_csv(in);
}

Eigen::MatrixXd rows(std::initializer_list<std::initializer_list<double>> r) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& row : r) {
        Eigen::Index j = 0;
        for (const double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

} // namespace

TEST(EncodeOrdinal, CumulativeCoding) {
    const std::vector<std::string> obs{"a", "c", "b", "b"};
    EXPECT_EQ(encode_ordinal(factor("f", {"a", "b", "c"}), obs), rows({{0, 0}, {1, 1}, {1, 0}, {1, 0}}));
}

TEST(EncodeOrdinal, BaselineOnlyObservations) {
    const std::vector<std::string> obs{"lo", "lo"};
    EXPECT_EQ(encode_ordinal(factor("f", {"lo", "hi"}), obs), rows({{0}, {0}}));
}

TEST(EncodeOrdinal, TopLevelSetsAllIncrements) {
    const std::vector<std::string> obs{"3", "3", "3"};
    EXPECT_EQ(encode_ordinal(factor("f", {"1", "2", "3"}), obs), rows({{1, 1}, {1, 1}, {1, 1}}));
}

TEST(EncodeOrdinal, UnknownLevelNamed) {
    const std::vector<std::string> obs{"a", "z"};
    try {
        encode_ordinal(factor("f", {"a", "b"}), obs);
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("'z'"), std::string::npos);
    }
}

TEST(EncodeOrdinal, NeedsTwoDistinctLevels) {
    const std::vector<std::string> obs{"a"};
    EXPECT_THROW(encode_ordinal(factor("f", {"a"}), obs), InputError);
    EXPECT_THROW(encode_ordinal(factor("f", {"a", "a"}), obs), InputError);
}

TEST(EncodeOrdinal, RowPermutationEquivariant) {
    std::mt19937 rng(7);
    const auto f = factor("f", {"a", "b", "c", "d", "e"});
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<std::string> obs(12);
        for (auto& o : obs) o = f.levels[std::uniform_int_distribution<std::size_t>(0, 4)(rng)];
        std::vector<std::size_t> perm(obs.size());
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<std::string> permuted(obs.size());
        for (std::size_t i = 0; i < obs.size(); ++i) permuted[i] = obs[perm[i]];
        const auto a = encode_ordinal(f, obs);
        const auto b = encode_ordinal(f, permuted);
        for (std::size_t i = 0; i < obs.size(); ++i)
            EXPECT_EQ(b.row(static_cast<Eigen::Index>(i)), a.row(static_cast<Eigen::Index>(perm[i])));
    }
}

// Nonnegative increments give a nondecreasing level-effect sequence, checked on a grid.
TEST(EncodeOrdinal, NonnegativeIncrementsAreMonotone) {
    for (int k = 2; k <= 6; ++k) {
        std::vector<std::string> levels;
        for (int r = 0; r < k; ++r) levels.push_back(std::to_string(r));
        const auto f = factor("f", levels);
        const auto block = encode_ordinal(f, levels);  // one row per level
        const std::vector<double> grid{0.0, 0.5, 2.0};
        std::vector<int> idx(static_cast<std::size_t>(k - 1), 0);
        while (true) {
            Eigen::VectorXd beta(k - 1);
            for (int j = 0; j < k - 1; ++j) beta[j] = grid[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
            const Eigen::VectorXd effect = block * beta;
            for (int r = 1; r < k; ++r) EXPECT_GE(effect[r], effect[r - 1]);
            int pos = 0;
            while (pos < k - 1 && ++idx[static_cast<std::size_t>(pos)] == 3) idx[static_cast<std::size_t>(pos++)] = 0;
            if (pos == k - 1) break;
        }
    }
}

TEST(Assemble, GaussianOneFactor) {
    const auto data = csv("y,g\n1,a\n2,b\n3,c\n");
    ModelSpec spec;
    spec.family = Family::gaussian();
    spec.response = "y";
    spec.factors = {factor("g", {"a", "b", "c"})};
    const auto d = assemble(spec, data);
    EXPECT_EQ(d.cols(), 3);
    EXPECT_EQ(d.constrained(), (std::vector<Eigen::Index>{1, 2}));
    EXPECT_EQ(d.labels()[0].kind, ColumnKind::intercept);
    EXPECT_EQ(d.labels()[2].display(), "g>=c");
}

TEST(Assemble, LogisticCovariatesOnly) {
    const auto data = csv("y,u,v\n0,1,2\n1,2,1\n1,3,5\n0,4,3\n");
    ModelSpec spec;
    spec.family = Family::logistic();
    spec.response = "y";
    spec.covariates = {"u", "v"};
    const auto d = assemble(spec, data);
    EXPECT_EQ(d.cols(), 3);
    EXPECT_TRUE(d.constrained().empty());
}

TEST(Assemble, CoxHasNoIntercept) {
    const auto data = csv("t,e,g\n1,1,1\n2,0,2\n3,1,3\n4,1,4\n5,0,2\n");
    ModelSpec spec;
    spec.family = Family::cox();
    spec.time = "t";
    spec.event = "e";
    spec.factors = {factor("g", {"1", "2", "3", "4"})};
    const auto d = assemble(spec, data);
    EXPECT_EQ(d.cols(), 3);
    EXPECT_EQ(d.constrained(), (std::vector<Eigen::Index>{0, 1, 2}));
    EXPECT_FALSE(d.intercept_column());

    spec.intercept = true;
    EXPECT_THROW(assemble(spec, data), InputError);
}

TEST(Assemble, ColumnOrderAndLabels) {
    const auto data = csv("y,x1,f1,f2\n1,0.5,a,p\n2,0.1,b,q\n3,0.7,a,q\n4,0.2,b,p\n5,0.9,b,q\n");
    ModelSpec spec;
    spec.family = Family::gaussian();
    spec.response = "y";
    spec.factors = {factor("f1", {"a", "b"}), factor("f2", {"p", "q"}, Direction::nonincreasing)};
    spec.covariates = {"x1"};
    const auto d = assemble(spec, data);
    ASSERT_EQ(d.cols(), 4);
    EXPECT_EQ(d.labels()[1].name, "f1");
    EXPECT_EQ(d.labels()[2].name, "f2");
    EXPECT_EQ(d.labels()[2].sign, -1);
    EXPECT_EQ(d.labels()[3].name, "x1");
    EXPECT_DOUBLE_EQ(d.matrix()(1, 2), -1.0);  // nonincreasing block is negated
    Eigen::VectorXd beta(4);
    beta << 0.0, 1.0, 0.5, 0.0;
    EXPECT_EQ(d.increments(beta, 1), std::vector<double>{-0.5});
    const auto effects = d.level_effects(beta, 1);
    EXPECT_DOUBLE_EQ(effects[0], 0.0);
    EXPECT_DOUBLE_EQ(effects[1], -0.5);
}

TEST(Assemble, RankDeficiencyNamesColumns) {
    const auto data = csv("y,g,x\n1,a,0\n2,b,1\n3,b,1\n");
    ModelSpec spec;
    spec.family = Family::gaussian();
    spec.response = "y";
    spec.factors = {factor("g", {"a", "b"})};
    spec.covariates = {"x"};
    try {
        assemble(spec, data);
        FAIL();
    } catch (const InputError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("rank deficient"), std::string::npos);
        EXPECT_NE(msg.find("g>=b"), std::string::npos);
        EXPECT_NE(msg.find("x"), std::string::npos);
    }
}

TEST(Assemble, BoundaryUnobservedLevelsDropped) {
    const auto data = csv("y,g\n1,b\n2,c\n3,c\n4,b\n");
    ModelSpec spec;
    spec.family = Family::gaussian();
    spec.response = "y";
    spec.factors = {factor("g", {"a", "b", "c", "d"})};
    const auto d = assemble(spec, data);
    EXPECT_EQ(d.cols(), 2);
    EXPECT_EQ(d.warnings().size(), 2u);
    const auto& block = d.factors()[0];
    EXPECT_EQ(block.baseline, 1u);
    EXPECT_EQ(block.status[0], LevelStatus::dropped);
    EXPECT_EQ(block.status[3], LevelStatus::dropped);
    Eigen::VectorXd beta(2);
    beta << 1.0, 0.25;
    const auto effects = d.level_effects(beta, 0);
    EXPECT_TRUE(std::isnan(effects[0]));
    EXPECT_DOUBLE_EQ(effects[1], 0.0);
    EXPECT_DOUBLE_EQ(effects[2], 0.25);
    EXPECT_TRUE(std::isnan(effects[3]));
}

TEST(Assemble, InteriorUnobservedLevelTiedToPredecessor) {
    const auto data = csv("y,g\n1,a\n2,c\n3,c\n4,a\n");
    ModelSpec spec;
    spec.family = Family::gaussian();
    spec.response = "y";
    spec.factors = {factor("g", {"a", "b", "c"})};
    const auto d = assemble(spec, data);
    EXPECT_EQ(d.cols(), 2);
    EXPECT_EQ(d.factors()[0].status[1], LevelStatus::unobserved_interior);
    Eigen::VectorXd beta(2);
    beta << 0.0, 2.0;
    EXPECT_EQ(d.level_effects(beta, 0), (std::vector<double>{0.0, 0.0, 2.0}));
    EXPECT_EQ(d.increments(beta, 0), (std::vector<double>{0.0, 2.0}));
}

TEST(Assemble, SingleObservedLevelRejected) {
    const auto data = csv("y,g\n1,a\n2,a\n");
    ModelSpec spec;
    spec.family = Family::gaussian();
    spec.response = "y";
    spec.factors = {factor("g", {"a", "b"})};
    EXPECT_THROW(assemble(spec, data), InputError);
}

TEST(Assemble, UnknownLevelNamesLine) {
    const auto data = csv("y,g\n1,a\n2,b\n3,zz\n");
    ModelSpec spec;
    spec.family = Family::gaussian();
    spec.response = "y";
    spec.factors = {factor("g", {"a", "b"})};
    try {
        assemble(spec, data);
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("'zz'"), std::string::npos);
    }
}

// Per-level effects decoded from beta, plus intercept and covariates, reproduce X beta.
TEST(Assemble, LevelEffectRoundTrip) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal;
    const std::vector<std::string> levels{"L1", "L2", "L3", "L4"};
    for (int rep = 0; rep < 25; ++rep) {
        std::ostringstream text;
        text << "y,g,h,x\n";
        for (int i = 0; i < 20; ++i) {
            text << normal(rng) << ',' << levels[static_cast<std::size_t>(i % 4)] << ','
                 << (i % 3 == 0 ? "lo" : "hi") << ',' << normal(rng) << '\n';
        }
        const auto data = csv(text.str());
        ModelSpec spec;
        spec.family = Family::gaussian();
        spec.response = "y";
        spec.factors = {factor("g", levels), factor("h", {"lo", "hi"}, Direction::nonincreasing)};
        spec.covariates = {"x"};
        const auto d = assemble(spec, data);
        Eigen::VectorXd beta(d.cols());
        for (Eigen::Index j = 0; j < beta.size(); ++j) beta[j] = std::abs(normal(rng));
        const Eigen::VectorXd eta = d.linear_predictor(beta);
        const auto g_eff = d.level_effects(beta, 0);
        const auto h_eff = d.level_effects(beta, 1);
        const auto x = data.numeric("x");
        for (std::size_t i = 0; i < data.rows(); ++i) {
            const auto gr = *spec.factors[0].rank_of(data.labels("g")[i]);
            const auto hr = *spec.factors[1].rank_of(data.labels("h")[i]);
            const double rebuilt = beta[0] + g_eff[gr] + h_eff[hr] + beta[d.cols() - 1] * x[static_cast<Eigen::Index>(i)];
            EXPECT_NEAR(rebuilt, eta[static_cast<Eigen::Index>(i)], 1e-12);
        }
        for (std::size_t r = 1; r < levels.size(); ++r) EXPECT_GE(g_eff[r], g_eff[r - 1]);
        EXPECT_LE(h_eff[1], h_eff[0]);
    }
}

TEST(ExtractResponse, ValidatesFamilySupport) {
    ModelSpec spec;
    spec.family = Family::logistic();
    spec.response = "y";
    EXPECT_THROW(extract_response(spec, csv("y\n0\n2\n")), InputError);
    spec.family = Family::cox();
    spec.time = "t";
    spec.event = "e";
    EXPECT_THROW(extract_response(spec, csv("t,e\n1,0\n2,0\n")), InputError);
    EXPECT_THROW(extract_response(spec, csv("t,e\n0,1\n2,0\n")), InputError);
    const auto r = extract_response(spec, csv("t,e\n3,1\n1,0\n2,1\n"));
    EXPECT_EQ(r.order, (std::vector<Eigen::Index>{0, 2, 1}));
}
