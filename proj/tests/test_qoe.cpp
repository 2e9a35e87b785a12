#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"

using namespace qoescape;

namespace {

CostHistogram two_class() { return CostHistogram::from_classes({{1.0, 1}, {2.0, 1}}); }
CostHistogram star50() { return hop_histogram(generate({spec::Star{50}})); }
CostHistogram grid77() { return hop_histogram(generate({spec::Grid{7, 7}})); }

double share_sum(const QoeSnapshot& s) {
  double sum = 0;
  for (const auto& r : s.classes) sum += static_cast<double>(r.count) * r.share;
  return sum;
}

}  // namespace

TEST(SlaPoint, RejectsNonPositive) {
  EXPECT_THROW(SlaPoint(0.0, 1.0), DomainError);
  EXPECT_THROW(SlaPoint(1.0, -1.0), DomainError);
  EXPECT_THROW(SlaPoint(std::nan(""), 1.0), DomainError);
}

TEST(SatisfactionWeight, Examples) {
  for (double a : {0.01, 1.0, 50.0}) EXPECT_EQ(satisfaction_weight(3.0, SlaPoint(a, 3.0)), 0.5);
  EXPECT_NEAR(satisfaction_weight(5.0, SlaPoint(1.0, 3.0)), 1.0 / (1.0 + std::exp(2.0)), 1e-15);
  EXPECT_NEAR(satisfaction_weight(5.0, SlaPoint(1.0, 3.0)), 0.119203, 5e-7);
  const double w = satisfaction_weight(2.0, SlaPoint(50.0, 3.0));
  EXPECT_TRUE(std::isfinite(w));
  EXPECT_LE(w, 1.0);
  EXPECT_GT(w, 1.0 - 1e-15);
  // The complement is carried separately and stays resolvable.
  EXPECT_NEAR(detail::logistic_complement(50.0), std::exp(-50.0), 1e-30);
  EXPECT_NEAR(detail::logistic_complement(50.0), 1.9287e-22, 1e-25);
  const double far = satisfaction_weight(1000.0, SlaPoint(100.0, 1.0));
  EXPECT_EQ(far, 0.0);
}

TEST(SatisfactionWeight, StrictlyDecreasingInCost) {
  const SlaPoint sla(1.3, 4.0);
  double prev = 2.0;
  for (double c = 0.5; c < 12.0; c += 0.25) {
    const double w = satisfaction_weight(c, sla);
    EXPECT_LT(w, prev);
    EXPECT_GT(w, 0.0);
    EXPECT_LT(w, 1.0);
    prev = w;
  }
}

TEST(Evaluate, CompleteGraph) {
  const auto h = hop_histogram(generate({spec::Complete{50}}));
  const auto s = evaluate(h, SlaPoint(1.0, 3.0));
  EXPECT_EQ(s.imbalance, 0.0);
  EXPECT_NEAR(s.mean_satisfaction, 1.0 / (1.0 + std::exp(-2.0)), 1e-15);
  EXPECT_NEAR(s.mean_satisfaction, 0.880797, 5e-7);
  for (double a : {0.01, 5.0, 100.0}) EXPECT_EQ(evaluate(h, SlaPoint(a, 0.7)).imbalance, 0.0);
}

TEST(Evaluate, TwoClassSymmetricPoint) {
  const auto s = evaluate(two_class(), SlaPoint(0.1, 1.5));
  EXPECT_EQ(s.mean_satisfaction, 0.5);
  EXPECT_NEAR(s.imbalance, oracle::two_class_imbalance(0.1), 1e-15);
  EXPECT_NEAR(s.imbalance, 4.47e-4, 5e-6);
}

TEST(Evaluate, StarAtLargeA) {
  const auto h = star50();
  const auto s = evaluate(h, SlaPoint(10.0, 1.5));
  const auto ref = oracle::per_pair(h, 10.0, 1.5);
  EXPECT_NEAR(s.imbalance, ref.imbalance, 1e-12);
  EXPECT_NEAR(s.imbalance, 0.304078, 5e-7);
}

TEST(Evaluate, SnapshotInvariants) {
  const auto h = grid77();
  for (double a : {0.05, 0.7, 3.0, 20.0}) {
    for (double h0 : {0.5, 2.2, 6.0, 13.0}) {
      const auto s = evaluate(h, SlaPoint(a, h0));
      EXPECT_NEAR(share_sum(s), 1.0, 1e-12);
      EXPECT_GE(s.imbalance, 0.0);
      EXPECT_LE(s.imbalance, 1.0);
      EXPECT_NEAR(s.entropy_bits, (1.0 - s.imbalance) * std::log2(2352.0), 1e-10);
      EXPECT_NEAR(s.total_weight, s.mean_satisfaction * 2352.0, 1e-9);
      for (std::size_t j = 1; j < s.classes.size(); ++j) EXPECT_LE(s.classes[j].weight, s.classes[j - 1].weight);
    }
  }
}

TEST(Evaluate, ExtremeStrictnessStaysNormalized) {
  const auto h = grid77();
  for (double a : {50.0, 100.0, 1000.0}) {
    for (double h0 : {0.1, 0.5, 0.9}) {
      const auto s = evaluate(h, SlaPoint(a, h0));
      EXPECT_TRUE(std::isfinite(s.imbalance));
      EXPECT_NEAR(share_sum(s), 1.0, 1e-12);
      // All mass on the cheapest class: I -> 1 - log2 K1 / log2 M.
      if (a >= 100.0) EXPECT_NEAR(s.imbalance, 1.0 - std::log2(168.0) / std::log2(2352.0), 1e-9);
    }
  }
}

TEST(Evaluate, MeanSatisfactionIncreasesWithThreshold) {
  const auto h = grid77();
  for (double a : {0.3, 2.0, 9.0}) {
    double prev = -1.0;
    for (double h0 = 0.5; h0 < 13.0; h0 += 0.37) {
      const double s = evaluate(h, SlaPoint(a, h0)).mean_satisfaction;
      EXPECT_GT(s, prev);
      prev = s;
    }
  }
}

TEST(Evaluate, MatchesPerPairOnSmallGraphs) {
  SplitMix64 rng(99);
  int checked = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 3 + rng.below(10);
    const auto raw = generate({spec::ErdosRenyi{n, rng.uniform(0.2, 0.8)}, rng()});
    if (raw.edge_count() < 2) continue;
    const auto g = largest_component(raw);
    if (g.node_count() < 3) continue;
    const auto h = hop_histogram(g);
    const double a = rng.uniform(0.05, 12.0), h0 = rng.uniform(0.3, 6.0);
    const auto s = evaluate(h, SlaPoint(a, h0));
    const auto ref = oracle::per_pair(h, a, h0);
    EXPECT_NEAR(s.imbalance, ref.imbalance, 1e-12);
    EXPECT_NEAR(s.mean_satisfaction, ref.s_bar, 1e-12);
    ++checked;
  }
  EXPECT_GT(checked, 150);
}

TEST(ImbalanceOfShares, Examples) {
  EXPECT_EQ(imbalance_of_shares(ShareVector({0.5, 0.5})), 0.0);
  EXPECT_EQ(imbalance_of_shares(ShareVector({1.0, 0.0})), 1.0);
  EXPECT_NEAR(imbalance_of_shares(ShareVector({0.5, 0.25, 0.25})), 1.0 - 1.5 / std::log2(3.0), 1e-15);
  EXPECT_NEAR(imbalance_of_shares(ShareVector({0.5, 0.25, 0.25})), 0.053605, 5e-7);
  EXPECT_THROW(imbalance_of_shares(ShareVector({1.0})), DomainError);
}

TEST(ShareVector, Validation) {
  EXPECT_THROW(ShareVector({0.5, 0.6}), DomainError);
  EXPECT_THROW(ShareVector({1.5, -0.5}), DomainError);
  const std::vector<double> scores = {1.0, 3.0};
  const auto p = ShareVector::from_scores(scores);
  EXPECT_DOUBLE_EQ(p[0], 0.25);
  EXPECT_THROW(ShareVector::from_scores(std::vector<double>{0.0, 0.0}), DomainError);
}

TEST(Decompose, Examples) {
  const auto u = decompose(ShareVector({0.25, 0.25, 0.25, 0.25}), {{0, 1}, {2, 3}});
  EXPECT_NEAR(u.between_gap, 0.0, 1e-15);
  for (double w : u.within_gaps) EXPECT_NEAR(w, 0.0, 1e-15);

  const ShareVector p({0.5, 0.25, 0.25});
  const auto d = decompose(p, {{0}, {1, 2}});
  // KL((1/2, 1/2) || (1/3, 2/3)) in bits.
  const double kl = 0.5 * std::log2(0.5 / (1.0 / 3.0)) + 0.5 * std::log2(0.5 / (2.0 / 3.0));
  EXPECT_NEAR(d.between_gap, kl, 1e-15);
  EXPECT_NEAR(d.between_gap, 0.08496, 5e-6);
  for (double w : d.within_gaps) EXPECT_NEAR(w, 0.0, 1e-15);
  EXPECT_NEAR(d.total_gap, kl, 1e-15);

  const auto single = decompose(p, {{0, 1, 2}});
  EXPECT_NEAR(single.between_gap, 0.0, 1e-15);
  EXPECT_NEAR(single.within_gaps.at(0), single.total_gap, 1e-15);
}

TEST(Decompose, Errors) {
  const ShareVector p({0.5, 0.5, 0.0});
  EXPECT_THROW(decompose(p, {{0, 1}, {2}}), DomainError);
  EXPECT_THROW(decompose(p, {{0, 1}}), DomainError);
  EXPECT_THROW(decompose(p, {{0, 1, 2}, {2}}), DomainError);
}

TEST(ReferenceIndices, Examples) {
  const auto u = reference_indices(ShareVector({0.25, 0.25, 0.25, 0.25}));
  EXPECT_NEAR(u.gini, 0.0, 1e-15);
  EXPECT_NEAR(u.jfi, 1.0, 1e-15);
  EXPECT_NEAR(u.cv, 0.0, 1e-15);
  const auto e = reference_indices(ShareVector({1.0, 0.0}));
  EXPECT_NEAR(e.gini, 0.5, 1e-15);
  EXPECT_NEAR(e.jfi, 0.5, 1e-15);
  EXPECT_NEAR(reference_indices(ShareVector({0.5, 0.5, 0.0})).jfi, 2.0 / 3.0, 1e-15);
}

TEST(ReferenceIndices, GiniMatchesPairwiseDefinition) {
  SplitMix64 rng(5);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x(2 + rng.below(12));
    for (double& v : x) v = rng.uniform(0.0, 1.0);
    double pairs = 0, mean = 0;
    for (double a : x) {
      mean += a;
      for (double b : x) pairs += std::fabs(a - b);
    }
    const double n = static_cast<double>(x.size());
    mean /= n;
    EXPECT_NEAR(reference_indices(x).gini, pairs / (2 * n * n * mean), 1e-13);
  }
}

TEST(AffineTransform, Examples) {
  const auto h = star50();
  const auto [shifted, sla_s] = affine_transform(h, SlaPoint(2.0, 1.5), 2.0, 1.0);
  EXPECT_EQ(shifted[0], (CostClass{3.0, 98}));
  EXPECT_EQ(shifted[1], (CostClass{4.0, 2352}));
  EXPECT_EQ(sla_s.h0(), 3.5);
  EXPECT_EQ(sla_s.a(), 2.0);

  const auto [scaled, sla_x] = affine_transform(h, SlaPoint(2.0, 1.5), 0.0, 2.0);
  EXPECT_EQ(scaled[1].cost, 4.0);
  EXPECT_EQ(sla_x.h0(), 3.0);
  EXPECT_EQ(sla_x.a(), 1.0);

  const auto [same, sla_i] = affine_transform(h, SlaPoint(2.0, 1.5), 0.0, 1.0);
  EXPECT_EQ(same, h);
  EXPECT_EQ(sla_i.a(), 2.0);

  EXPECT_THROW(affine_transform(h, SlaPoint(2.0, 1.5), -1.0, 1.0), DomainError);
  EXPECT_THROW(affine_transform(h, SlaPoint(2.0, 0.5), -2.5, 2.0), DomainError);
  EXPECT_THROW(affine_transform(h, SlaPoint(2.0, 1.5), 0.0, 0.0), DomainError);
}

TEST(AffineTransform, LeavesMetricsUnchanged) {
  SplitMix64 rng(31);
  for (int t = 0; t < 40; ++t) {
    const auto h = hop_histogram(largest_component(generate({spec::BarabasiAlbert{30, 2}, rng()})));
    const SlaPoint sla(rng.uniform(0.2, 8.0), rng.uniform(0.5, 5.0));
    const auto before = evaluate(h, sla);
    for (auto [c, lambda] : {std::pair{2.0, 1.0}, std::pair{0.0, 2.0}, std::pair{3.0, 0.5}}) {
      const auto [h2, sla2] = affine_transform(h, sla, c, lambda);
      const auto after = evaluate(h2, sla2);
      EXPECT_NEAR(after.imbalance, before.imbalance, 1e-12);
      EXPECT_NEAR(after.mean_satisfaction, before.mean_satisfaction, 1e-12);
    }
  }
}
