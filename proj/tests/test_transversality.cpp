#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "solenoid/rng.hpp"
#include "solenoid/transversality.hpp"
#include "support/oracles.hpp"

using namespace solenoid;

namespace {

SystemParams zero_system(int lap = 2, double lambda = 0.5) {
    return make_system(lap, lambda, TrigPoly::zero(), 3, 0.0, 1.0);
}

SystemParams cos_system(int lap, double lambda) {
    return make_system(lap, lambda, TrigPoly::harmonic(1, 1.0, 0.0), 3, 0.0);
}

}  // namespace

TEST_CASE("f == 0 makes every pair fail") {
    SystemParams p = zero_system();
    PairVerdict v = pair_check(p, Word{{1, 2}}, Word{{2, 1}}, Word{{1, 1}});
    CHECK(v.status == Verdict::NotTransversal);
    REQUIRE(v.witness.has_value());

    for (int pp = 1; pp <= 3; ++pp) {
        EqpReport rep = e_qp(p, 2, pp);
        CHECK(rep.e_lower == 4);
        CHECK(rep.e_upper == 4);
        CHECK(rep.certified);
    }
}

TEST_CASE("the diagonal pair is never transversal") {
    SystemParams p = cos_system(2, 0.5);
    Word a{{2, 1, 2}};
    PairVerdict v = pair_check(p, a, a, Word{{1, 2}});
    CHECK(v.status == Verdict::NotTransversal);

    EqpReport rep = e_qp(p, 1, 2);
    CHECK(rep.e_lower >= 1);
}

TEST_CASE("certified verdicts agree with the dense-grid oracle") {
    SystemParams p = cos_system(2, 0.1);  // small lambda: mixed verdicts
    oracles::DenseOracle oracle{p, 1e-5};
    RngStream rng(555);
    int q = 2, pp = 3;
    int checked_transversal = 0, checked_failing = 0;
    for (int t = 0; t < 60; ++t) {
        Word c = word_from_index(p.lap, pp, rng.below(pow_u64(p.lap, pp)));
        Word a = word_from_index(p.lap, q, rng.below(pow_u64(p.lap, q)));
        Word b = word_from_index(p.lap, q, rng.below(pow_u64(p.lap, q)));
        PairVerdict v = pair_check(p, a, b, c);
        if (v.status == Verdict::Unknown) continue;
        bool oracle_transversal = oracle.transversal(c, a, b);
        if (v.status == Verdict::Transversal) {
            CHECK(oracle_transversal);
            ++checked_transversal;
        } else {
            CHECK_FALSE(oracle_transversal);
            ++checked_failing;
        }
    }
    // The instance must actually exercise both outcomes.
    CHECK(checked_transversal > 0);
    CHECK(checked_failing > 0);
}

TEST_CASE("bracket soundness against the oracle count") {
    struct Instance {
        int lap;
        double lambda;
        int q, pp;
    };
    for (Instance inst : {Instance{2, 0.1, 1, 3}, Instance{2, 0.1, 2, 2}, Instance{2, 0.5, 2, 2},
                          Instance{3, 0.2, 1, 2}}) {
        SystemParams p = cos_system(inst.lap, inst.lambda);
        EqpReport rep = e_qp(p, inst.q, inst.pp);
        oracles::DenseOracle oracle{p, 2e-5};
        long long truth = oracle.count_e_qp(inst.q, inst.pp);
        INFO("lap=" << inst.lap << " lambda=" << inst.lambda << " q=" << inst.q
                    << " p=" << inst.pp << " bracket=[" << rep.e_lower << "," << rep.e_upper
                    << "] oracle=" << truth);
        CHECK(rep.e_lower <= truth);
        CHECK(truth <= rep.e_upper);
    }
}

TEST_CASE("verdicts are symmetric in the word pair") {
    SystemParams p = cos_system(2, 0.1);
    RngStream rng(808);
    int q = 2, pp = 2;
    for (int t = 0; t < 40; ++t) {
        Word c = word_from_index(p.lap, pp, rng.below(pow_u64(p.lap, pp)));
        Word a = word_from_index(p.lap, q, rng.below(pow_u64(p.lap, q)));
        Word b = word_from_index(p.lap, q, rng.below(pow_u64(p.lap, q)));
        PairVerdict vab = pair_check(p, a, b, c);
        PairVerdict vba = pair_check(p, b, a, c);
        CHECK(vab.status == vba.status);
        CHECK(vab.margin == Catch::Approx(vba.margin).margin(1e-12));
    }
}

TEST_CASE("refinement never flips a certified verdict") {
    SystemParams p = cos_system(2, 0.1);
    RngStream rng(9001);
    int q = 2, pp = 2;
    for (int t = 0; t < 50; ++t) {
        Word c = word_from_index(p.lap, pp, rng.below(pow_u64(p.lap, pp)));
        Word a = word_from_index(p.lap, q, rng.below(pow_u64(p.lap, q)));
        Word b = word_from_index(p.lap, q, rng.below(pow_u64(p.lap, q)));
        PairCheckOptions coarse{0.0, 0};  // no refinement at the default step
        PairCheckOptions fine;
        fine.grid_step = default_grid_step(p, q) / 2.0;
        fine.max_refine = 0;
        PairVerdict vc = pair_check(p, a, b, c, coarse);
        PairVerdict vf = pair_check(p, a, b, c, fine);
        if (vc.status == Verdict::Transversal) CHECK(vf.status == Verdict::Transversal);
        if (vc.status == Verdict::NotTransversal) CHECK(vf.status == Verdict::NotTransversal);
        // Unknowns may resolve either way.
    }
}

TEST_CASE("stabilization at p=1 for f == 0 and plateau detection") {
    SystemParams p0 = zero_system();
    EqReport er = e_q_stabilized(p0, 2, 4);
    CHECK(er.stabilized);
    CHECK(er.history.size() == 2);  // p=1 and p=2 already agree
    CHECK(er.last().e_lower == 4);
    CHECK(er.last().e_upper == 4);

    SystemParams pc = cos_system(2, 0.5);
    EqReport erc = e_q_stabilized(pc, 1, 4);
    CHECK(erc.stabilized);
}

TEST_CASE("growth table carries the spectral criterion") {
    SystemParams p = make_system(2, 0.5, TrigPoly::harmonic(1, 1.0, 0.0), 4, 0.3);
    auto rows = transversality_sweep(p, 2, 3);
    REQUIRE(rows.size() == 2);
    for (const auto& row : rows) {
        CHECK(row.e_lower <= row.e_upper);
        CHECK(row.e_upper >= 1);
        double denom = std::pow(p.regime_product(), row.q);
        CHECK(row.criterion == Catch::Approx(row.e_upper / denom));
        CHECK(row.growth_log ==
              Catch::Approx(std::log(static_cast<double>(row.e_upper)) / row.q));
    }
}

TEST_CASE("budget below one interval is rejected, sampling flagged otherwise") {
    SystemParams p = cos_system(2, 0.5);
    EnumerationOptions opts;
    opts.triple_budget = 3;  // less than one interval's 4 pairs at q=1
    CHECK_THROWS_AS(e_qp(p, 1, 1, opts), std::invalid_argument);

    EnumerationOptions sample_opts;
    sample_opts.triple_budget = 4 * 4 * 2;  // only two intervals of the eight at p=3
    EqpReport rep = e_qp(p, 2, 3, sample_opts);
    CHECK_FALSE(rep.certified);
    CHECK(rep.intervals_checked <= 2);
}
