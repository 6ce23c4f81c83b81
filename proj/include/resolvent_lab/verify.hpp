#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "resolvent_lab/suites.hpp"

namespace rlab {

enum class Profile { Smoke, Desk, Deep };
std::string_view to_string(Profile p);
Profile parse_profile(std::string_view s);

/// Samples per integral for a profile: 1e5, 1e7, 1e8.
std::uint64_t profile_samples(Profile p);

enum class CheckStatus { Pass, Fail };
std::string_view to_string(CheckStatus s);

struct CheckRecord {
  std::string id;
  std::string anchor;
  CheckStatus status = CheckStatus::Fail;
  std::uint64_t draws = 0;
  std::uint64_t violations = 0;
  double worst_margin = 0.0;  // min relative slack; may be +inf when nothing was bounded
  std::uint64_t seed = 0;
  double wall_time = 0.0;
  std::string detail;
};

/// Declared tolerance on worst_margin: inequalities that can hold with
/// equality are allowed to miss by rounding.
inline constexpr double kMarginTolerance = 1e-12;

/// Pass iff no violations and worst_margin >= -kMarginTolerance.
CheckRecord make_record(std::string id, std::string anchor, std::uint64_t draws, std::uint64_t violations,
                        double worst_margin, std::uint64_t seed, std::string detail = {});
CheckRecord record_from_suite(const SuiteResult& s, std::string anchor);
/// Sum of draws and violations, min of margins, over already-run records.
CheckRecord aggregate(std::string id, std::string anchor, const std::vector<CheckRecord>& parts, std::uint64_t seed);

struct VerifyOptions {
  Profile profile = Profile::Smoke;
  std::uint64_t seed = 20240601;
  int workers = 0;
  bool record_time = true;
  std::function<void(const CheckRecord&)> on_record;  // progress callback
};

inline constexpr int kReportSchemaVersion = 1;

struct VerifyReport {
  int schema_version = kReportSchemaVersion;
  Profile profile = Profile::Smoke;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> criteria;  // criterion label -> record id
  std::vector<CheckRecord> records;

  bool all_pass() const;
  const CheckRecord* find(std::string_view id) const;
};

/// Criterion labels and the record id each one maps to.
std::vector<std::pair<std::string, std::string>> criteria_map();

/// Every check in dependency order; failures are records, never exceptions.
VerifyReport run_all(const VerifyOptions& options);

// Individual criteria, shared by run_all and the acceptance test.
struct CheckContext {
  std::uint64_t seed = 20240601;
  int workers = 0;
  bool record_time = true;
};

CheckRecord check_bounds_1d(const CheckContext& ctx, std::vector<CheckRecord>* parts = nullptr);
CheckRecord check_geometry(const CheckContext& ctx, std::vector<CheckRecord>* parts = nullptr);
CheckRecord check_lemmas(const CheckContext& ctx, std::vector<CheckRecord>* parts = nullptr);
CheckRecord check_classification(const CheckContext& ctx);
CheckRecord check_f_omega(const CheckContext& ctx, std::uint64_t samples);
CheckRecord check_mc_oracles(const CheckContext& ctx, std::uint64_t samples, int seeds = 100);
CheckRecord check_worker_invariance(const CheckContext& ctx, std::uint64_t samples);
/// ce_morse_d3 at alpha = (5, 5, 5), k0 = (1/4, 0, 0).
CheckRecord check_non_suppression(const CheckContext& ctx, std::uint64_t samples);
/// nn3 sup-scanned beta I at beta = 0.3 and 0.01; the scan refines each
/// candidate with scan_samples and re-estimates the winner with samples.
CheckRecord check_suppression_trend(const CheckContext& ctx, std::uint64_t samples, std::uint64_t scan_samples);

}  // namespace rlab
