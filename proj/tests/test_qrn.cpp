#include <gtest/gtest.h>

#include <random>

#include "safecase/qrn.hpp"
#include "test_support.hpp"

using namespace safecase::qrn;
using safecase::Rational;
using safecase::testing::fixture_text;

TEST(Qrn, BudgetExamples) {
  EXPECT_EQ(impact_budget(Rational(1000), Rational(100000)), Rational(1, 100));
  EXPECT_EQ(impact_budget(Rational(1000), Rational(1000)), Rational(1));
  EXPECT_EQ(impact_budget(Rational(1000), Rational(10)), Rational(1));
  EXPECT_EQ(impact_budget(Rational(1000), Rational(1'000'000'000)), Rational(1, 1'000'000));
  EXPECT_THROW(impact_budget(Rational(0), Rational(10)), QrnError);
  EXPECT_THROW(impact_budget(Rational(10), Rational(-1)), QrnError);
}

TEST(Qrn, MeanTimeExamples) {
  EXPECT_EQ(*mean_time_between(Rational(1000), Rational(5, 1000)).hours, Rational(200000));
  EXPECT_TRUE(mean_time_between(Rational(1000), Rational(0)).infinite());
  EXPECT_EQ(mean_time_between(Rational(1000), Rational(0)).to_string(), "inf");
  EXPECT_THROW(mean_time_between(Rational(1000), Rational(3, 2)), QrnError);
  EXPECT_THROW(mean_time_between(Rational(0), Rational(1, 2)), QrnError);
}

TEST(Qrn, BudgetIsMonotone) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::int64_t> hours(1, 10'000'000);
  for (int i = 0; i < 2000; ++i) {
    Rational e1(hours(rng)), e2(hours(rng)), n1(hours(rng)), n2(hours(rng));
    if (e2 < e1) std::swap(e1, e2);
    if (n2 < n1) std::swap(n1, n2);
    EXPECT_LE(impact_budget(e1, n1), impact_budget(e2, n1));
    EXPECT_GE(impact_budget(e1, n1), impact_budget(e1, n2));
  }
}

TEST(Qrn, BudgetAndMeanTimeAreInverse) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::int64_t> hours(1, 10'000'000);
  for (int i = 0; i < 2000; ++i) {
    Rational e(hours(rng)), n(hours(rng));
    Rational b = impact_budget(e, n);
    MeanTime t = mean_time_between(e, b);
    ASSERT_FALSE(t.infinite());
    if (e <= n) {
      EXPECT_EQ(*t.hours, n);
    } else {
      EXPECT_EQ(*t.hours, e);
    }
    EXPECT_TRUE(t >= n);
  }
}

TEST(Qrn, AllocationIsExact) {
  Allocation a{Rational(1, 100), {{"sense", Rational(5, 1000)}, {"act", Rational(5, 1000)}}};
  AllocationVerdict v = check_allocation(a);
  EXPECT_TRUE(v.pass);
  EXPECT_EQ(v.total, Rational(1, 100));
  EXPECT_EQ(v.excess, Rational(0));

  a.parts["ctrl"] = Rational(1, 1000);
  v = check_allocation(a);
  EXPECT_FALSE(v.pass);
  EXPECT_EQ(v.excess, Rational(1, 1000));

  a.parts["ctrl"] = Rational(-1, 1000);
  EXPECT_THROW(check_allocation(a), QrnError);
}

TEST(Qrn, AllocationMatchesSumOracle) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::int64_t> num(0, 1000);
  for (int i = 0; i < 1000; ++i) {
    Allocation a{Rational(num(rng), 1000), {}};
    Rational sum(0);
    for (int k = 0; k < 4; ++k) {
      Rational p(num(rng), 4000);
      a.parts["p" + std::to_string(k)] = p;
      sum = sum + p;
    }
    AllocationVerdict v = check_allocation(a);
    EXPECT_EQ(v.pass, sum <= a.budget);
    EXPECT_EQ(v.total, sum);
    EXPECT_EQ(v.excess, v.pass ? Rational(0) : sum - a.budget);
  }
}

TEST(Qrn, TablesParseAndRoundTrip) {
  RiskNormTable norms = RiskNormTable::parse(fixture_text("risk_norms.tbl"));
  ASSERT_EQ(norms.rows.size(), 5u);
  EXPECT_EQ(norms.rows[0].norm_hours, Rational(100000));
  EXPECT_EQ(norms.rows[4].band.label(), "[40, inf)");
  EXPECT_EQ(RiskNormTable::parse(norms.render()).render(), norms.render());
  EXPECT_EQ(norms.render(), RiskNormTable::pedestrian_defaults().render());

  ExposureTable exposure = ExposureTable::parse(fixture_text("exposure.tbl"));
  ASSERT_EQ(exposure.rows.size(), 7u);
  EXPECT_EQ(exposure.find(RoadType::Urban, Rational(50)).exposure_hours, Rational(1000));
  EXPECT_EQ(exposure.find(RoadType::Highway, Rational(100)).exposure_hours, Rational(10'000'000));
  EXPECT_THROW(exposure.find(RoadType::Urban, Rational(100)), QrnError);
  EXPECT_EQ(ExposureTable::parse(exposure.render()).render(), exposure.render());
  EXPECT_EQ(exposure.render(), ExposureTable::pedestrian_defaults().render());

  CapabilityTable cap = CapabilityTable::parse(fixture_text("capability_60.tbl"));
  ASSERT_EQ(cap.bands.size(), 3u);
  EXPECT_EQ(cap.at(Rational(60))[1], Rational(5, 100));
  EXPECT_THROW(cap.at(Rational(50)), QrnError);
  EXPECT_EQ(CapabilityTable::parse(cap.render()).render(), cap.render());
}

TEST(Qrn, BandsAreHalfOpen) {
  RiskNormTable norms = RiskNormTable::pedestrian_defaults();
  EXPECT_EQ(norms.band_of(Rational(0)), std::optional<std::size_t>(0));
  EXPECT_EQ(norms.band_of(Rational(999, 100)), std::optional<std::size_t>(0));
  EXPECT_EQ(norms.band_of(Rational(10)), std::optional<std::size_t>(1));
  EXPECT_EQ(norms.band_of(Rational(1000)), std::optional<std::size_t>(4));
  EXPECT_EQ(norms.band_of(Rational(-1)), std::nullopt);
  EXPECT_EQ(SpeedBand::parse("[ 10 , 20 )"), (SpeedBand{Rational(10), Rational(20)}));
  EXPECT_THROW(SpeedBand::parse("[20, 10)"), QrnError);
  EXPECT_THROW(SpeedBand::parse("(0, 10)"), QrnError);
}

TEST(Qrn, MalformedTablesAreRejected) {
  EXPECT_THROW(RiskNormTable::parse("[risk_norm]\nimpact_speed_kmh = [0, 10)\nnorm_h = 0\n"), std::exception);
  EXPECT_THROW(RiskNormTable::parse("[risk_norm]\nimpact_speed_kmh = [0, 10)\nnorm_h = 1\n"
                                    "[risk_norm]\nimpact_speed_kmh = [20, inf)\nnorm_h = 1\n"),
               std::exception);
  EXPECT_THROW(ExposureTable::parse("[exposure]\nroad = rural\nspeed_kmh = 30\nexposure_h = 1\n"), std::exception);
  EXPECT_THROW(CapabilityTable::parse("[capability]\nspeed_kmh = 60\nband = [0, 10)\nprobability = 2\n"),
               std::exception);
}

TEST(Qrn, Urban70AtSixtyIsInadmissibleInTheSecondBand) {
  CapabilityTable cap = CapabilityTable::parse(fixture_text("capability_60.tbl"));
  ExposureTable exposure = ExposureTable::pedestrian_defaults();
  AdmissibilityResult r =
      admissible_speeds(cap, exposure.find(RoadType::Urban, Rational(70)), RiskNormTable::pedestrian_defaults());
  ASSERT_EQ(r.verdicts.size(), 1u);
  const SpeedVerdict& v = r.verdicts[0];
  EXPECT_FALSE(v.admissible);
  EXPECT_EQ(v.violated_band, std::optional<std::size_t>(1));
  EXPECT_EQ(*v.mean_times[0].hours, Rational(500000));
  EXPECT_EQ(*v.mean_times[1].hours, Rational(200000));
  EXPECT_TRUE(v.mean_times[4].infinite());
  EXPECT_EQ(r.max_admissible_kmh, std::nullopt);

  AdmissibilityResult hw =
      admissible_speeds(cap, exposure.find(RoadType::Highway, Rational(100)), RiskNormTable::pedestrian_defaults());
  EXPECT_TRUE(hw.verdicts[0].admissible);
  EXPECT_EQ(hw.max_admissible_kmh, std::optional<Rational>(Rational(60)));
  EXPECT_THROW(admissible_speeds(cap, exposure.rows[0], RiskNormTable::pedestrian_defaults(),
                                 std::vector<Rational>{Rational(50)}),
               QrnError);
}

TEST(Qrn, NormBoundaryIsInclusive) {
  CapabilityTable cap;
  cap.bands = {SpeedBand{Rational(0), Rational(10)}};
  cap.by_speed[Rational(30)] = {Rational(1, 100)};
  ExposureTable::Row row{RoadType::Urban, Rational(50), Rational(1000)};
  RiskNormTable norms = RiskNormTable::pedestrian_defaults();
  EXPECT_TRUE(admissible_speeds(cap, row, norms).verdicts[0].admissible);
  cap.by_speed[Rational(30)] = {Rational(1, 100) + Rational(1, 1'000'000'000)};
  EXPECT_FALSE(admissible_speeds(cap, row, norms).verdicts[0].admissible);
}

TEST(Qrn, AdmissibilityIsAntitoneInSpeed) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::int64_t> step(0, 3);
  RiskNormTable norms = RiskNormTable::pedestrian_defaults();
  for (int trial = 0; trial < 200; ++trial) {
    CapabilityTable cap;
    for (const auto& row : norms.rows) cap.bands.push_back(row.band);
    std::vector<std::int64_t> level(cap.bands.size(), 0);
    for (int s = 10; s <= 120; s += 10) {
      std::vector<Rational> probs;
      for (auto& l : level) {
        l += step(rng);
        probs.push_back(Rational(l, 100'000));
      }
      cap.by_speed[Rational(s)] = probs;
    }
    ExposureTable::Row row{RoadType::Urban, Rational(50), Rational(10 + trial * 10)};
    AdmissibilityResult r = admissible_speeds(cap, row, norms);
    bool seen_bad = false;
    std::optional<Rational> last_ok;
    for (const SpeedVerdict& v : r.verdicts) {
      if (seen_bad) {
        EXPECT_FALSE(v.admissible) << v.speed_kmh.to_string();
      }
      if (!v.admissible) seen_bad = true;
      if (v.admissible) last_ok = v.speed_kmh;
    }
    EXPECT_EQ(r.max_admissible_kmh, last_ok);
  }
}
