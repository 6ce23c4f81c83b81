// Acceptance run: one line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "resolvent_lab/serialize.hpp"
#include "resolvent_lab/verify.hpp"

using namespace rlab;

namespace {

// sample budgets and wall-time limits per criterion
constexpr std::uint64_t kDeskSamples = 10000000;
constexpr std::uint64_t kDeepSamples = 100000000;
constexpr std::uint64_t kScanSamples = 1000000;
constexpr std::uint64_t kFOmegaSamples = 1000000;
constexpr std::uint64_t kOracleSamples = 20000;
constexpr int kOracleSeeds = 100;
constexpr double kBoundsLimit = 120, kGeometryLimit = 120, kClassifyLimit = 300, kLemmaLimit = 60;

int failures = 0;

void line(const char* ac, const CheckRecord& r, double secs, double limit, const std::string& extra = {}) {
  bool ok = r.status == CheckStatus::Pass && (limit <= 0 || secs < limit);
  failures += !ok;
  std::printf("%s %s %s draws=%llu violations=%llu worst_margin=%.6g time=%.1fs", ac, ok ? "PASS" : "FAIL",
              r.id.c_str(), (unsigned long long)r.draws, (unsigned long long)r.violations, r.worst_margin, secs);
  if (limit > 0) std::printf(" limit=%.0fs", limit);
  if (!extra.empty()) std::printf(" %s", extra.c_str());
  if (!r.detail.empty()) std::printf(" [%s]", r.detail.c_str());
  std::printf("\n");
  std::fflush(stdout);
}

CheckRecord timed(const std::function<CheckRecord()>& f, double& secs) {
  auto t0 = std::chrono::steady_clock::now();
  CheckRecord r = f();
  secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace

int main() {
  CheckContext ctx;
  double s = 0;

  auto r1 = timed([&] { return check_non_suppression(ctx, kDeskSamples); }, s);
  line("AC1", r1, s, 0);

  auto r2 = timed([&] { return check_suppression_trend(ctx, kDeepSamples, kScanSamples); }, s);
  line("AC2", r2, s, 0);

  auto r3 = timed([&] { return check_bounds_1d(ctx); }, s);
  line("AC3", r3, s, kBoundsLimit);

  auto r4 = timed([&] { return check_geometry(ctx); }, s);
  line("AC4", r4, s, kGeometryLimit);

  auto r5 = timed([&] { return check_classification(ctx); }, s);
  line("AC5", r5, s, kClassifyLimit);

  auto r6 = timed([&] { return check_f_omega(ctx, kFOmegaSamples); }, s);
  line("AC6", r6, s, 0);

  auto r7 = timed([&] { return check_lemmas(ctx); }, s);
  line("AC7", r7, s, kLemmaLimit);

  auto r8 = timed([&] { return check_mc_oracles(ctx, kOracleSamples, kOracleSeeds); }, s);
  line("AC8", r8, s, 0);

  // byte-identical reports across repeated runs and worker counts
  auto t0 = std::chrono::steady_clock::now();
  auto report = [](int workers) {
    VerifyOptions o;
    o.workers = workers;
    o.record_time = false;
    return dump(to_json(run_all(o)));
  };
  std::string a = report(1), b = report(1), c = report(8);
  CheckContext inv = ctx;
  inv.record_time = false;
  auto r9 = check_worker_invariance(inv, 100000);
  std::uint64_t mismatches = (a != b) + (a != c);
  r9.draws += 2;
  r9.violations += mismatches;
  if (mismatches) r9.status = CheckStatus::Fail;
  s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  line("AC9", r9, s, 0, "report_bytes=" + std::to_string(a.size()) + " report_mismatches=" + std::to_string(mismatches));

  std::printf("%s: %d of 9 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
