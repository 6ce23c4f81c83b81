#pragma once

#include <json.hpp>
#include <string>

#include "resolvent_lab/calculus.hpp"
#include "resolvent_lab/classify.hpp"
#include "resolvent_lab/quadrature.hpp"
#include "resolvent_lab/scaling.hpp"
#include "resolvent_lab/verify.hpp"

// JSON views of the result types. Non-finite doubles are written as null.
// Every top-level artifact carries schema_version.
namespace rlab {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

Json to_json(const Vec& v);
Json to_json(const QuadratureEstimate& e);
Json to_json(const ResolventQuery& q);
Json to_json(const HyperplaneCertificate& c);
Json to_json(const CriticalPointTable& t);
Json to_json(const CurvatureProbe& p);
Json to_json(const SuppressionConstants& c);
Json to_json(const FOmegaFit& f);
Json to_json(const ClassificationReport& r);
Json to_json(const ScanResult& r, bool all_cells = false);
Json to_json(const PowerLawFit& f);
Json to_json(const SweepResult& r);
Json to_json(const SlabBound& b);
Json to_json(const LevelCurve& c);
Json to_json(const CurvatureSequence& s);
Json to_json(const CheckRecord& r);
Json to_json(const VerifyReport& r);

/// Wraps a payload as {"schema_version", "kind", ...payload}.
Json artifact(std::string kind, Json payload);

/// Deterministic text form: two-space indent, trailing newline.
std::string dump(const Json& j);

}  // namespace rlab
