// json_io.hpp — JSON interchange for every domain type. Complex scalars are
// two-element [re, im] arrays; matrices are row-major nested arrays (rows of
// entries). Loaders validate structure and throw SchemaError with the
// offending field path.

#pragma once

#include <string>

#include <json.hpp>

#include "qoptk/fixedpoints.hpp"
#include "qoptk/processes.hpp"

namespace qoptk {

using json = nlohmann::ordered_json;

json to_json(const CMat& m);
json to_json(const CPMap& m);
json to_json(const Tolerances& t);
json to_json(const Observable& o);
json to_json(const Instrument& i);
json to_json(const MeasurementProcess& p);
json to_json(const MapClassification& c);
json to_json(const EffectClass& c);
json to_json(const ObservableClass& c);
json to_json(const ScalingReport& r);
json to_json(const RankDecision& d);
json to_json(const HierarchyVerdict& v);
json to_json(const ProcessClassReport& r);
json to_json(const PropertyResult& r);
json to_json(const DisturbanceReport& r);
json to_json(const InstrumentTiers& t);
json to_json(const BlockDecomposition& b);
json to_json(const FixedPointStructure& f);
json to_json(const ClassicalAction& a);

CMat cmat_from_json(const json& j, const std::string& path);
CPMap cpmap_from_json(const json& j, const std::string& path);
Tolerances tolerances_from_json(const json& j, const std::string& path);
Observable observable_from_json(const json& j, const std::string& path);
Instrument instrument_from_json(const json& j, const std::string& path);
MeasurementProcess process_from_json(const json& j, const std::string& path);

// Parses a file (SchemaError on parse failure) and dispatches on content.
json load_json_file(const std::string& file);
void write_json_file(const std::string& file, const json& j);

// "cpmap" | "instrument" | "observable" | "process", by structural inspection.
std::string detect_payload_kind(const json& j);

} // namespace qoptk
