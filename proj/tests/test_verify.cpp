#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "resolvent_lab/error.hpp"
#include "resolvent_lab/serialize.hpp"
#include "resolvent_lab/suites.hpp"
#include "resolvent_lab/verify.hpp"

using namespace rlab;

TEST_CASE("record status") {
  CHECK(make_record("a", "x", 10, 0, 0.5, 1).status == CheckStatus::Pass);
  CHECK(make_record("a", "x", 10, 1, 0.5, 1).status == CheckStatus::Fail);
  CHECK(make_record("a", "x", 10, 0, -1e-13, 1).status == CheckStatus::Pass);
  CHECK(make_record("a", "x", 10, 0, -1e-6, 1).status == CheckStatus::Fail);
  CHECK(make_record("a", "x", 10, 0, std::numeric_limits<double>::infinity(), 1).status == CheckStatus::Pass);
  auto agg = aggregate("all", "x", {make_record("a", "x", 10, 0, 0.5, 1), make_record("b", "x", 5, 2, -0.1, 1)}, 1);
  CHECK(agg.draws == 15);
  CHECK(agg.violations == 2);
  CHECK(agg.worst_margin == doctest::Approx(-0.1));
  CHECK(agg.status == CheckStatus::Fail);
}

TEST_CASE("criteria map is one to one") {
  auto m = criteria_map();
  CHECK(m.size() == 9);
  std::set<std::string> ids;
  for (std::size_t i = 0; i < m.size(); ++i) {
    CHECK(m[i].first == "AC" + std::to_string(i + 1));
    ids.insert(m[i].second);
  }
  CHECK(ids.size() == 9);
}

TEST_CASE("profiles") {
  CHECK(parse_profile("smoke") == Profile::Smoke);
  CHECK(parse_profile("desk") == Profile::Desk);
  CHECK(parse_profile("deep") == Profile::Deep);
  CHECK_THROWS_AS(parse_profile("fast"), Error);
  CHECK(profile_samples(Profile::Smoke) == 100000);
  CHECK(profile_samples(Profile::Desk) == 10000000);
  CHECK(profile_samples(Profile::Deep) == 100000000);
}

TEST_CASE("lemma suites") {
  CHECK(suite_delbeta(2, 20000).violations == 0);
  CHECK(suite_lnsint(2, 200).violations == 0);
  CHECK(suite_idshift(2, 20000).violations == 0);
  CHECK(suite_nablaomdiff(2, 20000).violations == 0);
  CHECK(suite_bracket(2, 20000).violations == 0);
}

TEST_CASE("checks carry their seed and pass") {
  CheckContext ctx;
  ctx.seed = 5;
  ctx.workers = 1;
  ctx.record_time = false;
  std::vector<CheckRecord> parts;
  auto b = check_bounds_1d(ctx, &parts);
  CHECK(b.status == CheckStatus::Pass);
  CHECK(b.wall_time == 0.0);
  CHECK(parts.size() == 4);
  auto l = check_lemmas(ctx);
  CHECK(l.status == CheckStatus::Pass);
}

TEST_CASE("json views") {
  CheckRecord r = make_record("x.y", "anchor", 3, 0, std::numeric_limits<double>::infinity(), 7);
  Json j = to_json(r);
  CHECK(j["worst_margin"].is_null());
  CHECK(j["status"] == "Pass");
  // an undefined margin never passes
  CHECK(make_record("x.y", "anchor", 3, 0, std::numeric_limits<double>::quiet_NaN(), 7).status == CheckStatus::Fail);
  for (const char* k : {"id", "anchor", "status", "draws", "violations", "worst_margin", "seed", "wall_time"})
    CHECK(j.contains(k));
  Json a = artifact("probe", Json{{"x", 1}});
  CHECK(a["schema_version"] == kSchemaVersion);
  CHECK(a["kind"] == "probe");
  auto text = dump(a);
  CHECK(text.back() == '\n');
  CHECK(Json::parse(text) == a);
}

TEST_CASE("verify report round trip") {
  VerifyReport rep;
  rep.seed = 3;
  rep.criteria = criteria_map();
  rep.records.push_back(make_record("bounds.one_dimensional", "a", 1, 0, 1.0, 3));
  Json j = to_json(rep);
  CHECK(j["schema_version"] == 1);
  CHECK(j["criteria"]["AC3"] == "bounds.one_dimensional");
  CHECK(j["summary"]["pass"] == 1);
  CHECK(Json::parse(dump(j)) == j);
  CHECK(rep.all_pass());
  CHECK(rep.find("bounds.one_dimensional") != nullptr);
  CHECK(rep.find("nope") == nullptr);
}
