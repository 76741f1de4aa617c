#pragma once

// JSON and CSV persistence. Times are seconds and frequencies rad/s in every
// file; complex numbers are [re, im] pairs.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qndcount/analysis.hpp"
#include "qndcount/dynamics.hpp"
#include "qndcount/inference.hpp"
#include "qndcount/protocol.hpp"
#include "qndcount/symbasis.hpp"

namespace qndcount {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// Parses `text`; syntax errors become ParseError with the 1-based line.
Json parse_json(std::string_view text);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

// 1-based line where element `index` of the array under top-level `key`
// starts (empty key: the document is the array),
// 0 if it cannot be located.
std::size_t locate_array_element(std::string_view text, std::string_view key, std::size_t index);

Json to_json(const BlockOperators& ops);
Json to_json(const SymmetricBlockState& s);
Json to_json(const PureCollectiveState& s);
Json to_json(const Posterior& p);
Json to_json(const Schedule& s);
Json to_json(const ProtocolParams& p);
Json to_json(const TrajectoryLog& log);
Json to_json(const BatchSummary& s);
Json to_json(const ScheduleResult& r);

PureCollectiveState pure_state_from_json(const Json& j);
SymmetricBlockState block_state_from_json(const Json& j);
Schedule schedule_from_json(const Json& j);

struct RecordParams {
  double omega = 0.0;
  double gamma = 0.0;
  double tau_eit = 0.0;
  int atoms = 0;
};

struct RecordFile {
  MeasurementRecord record;
  std::optional<RecordParams> params;
};

Json record_to_json(const MeasurementRecord& record, const std::optional<RecordParams>& params);
// Entry-level problems are reported at the entry's line in `text`.
RecordFile record_from_text(std::string_view text);

struct CandidatesFile {
  std::vector<FockDistribution> candidates;
  std::optional<Posterior> prior;
};

Json candidates_to_json(const std::vector<FockDistribution>& candidates,
                        const std::optional<Posterior>& prior);
CandidatesFile candidates_from_text(std::string_view text);

Json posterior_file(const std::vector<FockDistribution>& candidates,
                    const std::vector<Posterior>& trace, const Json& config);

// JSON-lines log: a header object carrying the config, then one trajectory
// per line.
void write_trajectories(std::ostream& out, const Json& config,
                        const std::vector<TrajectoryLog>& logs);

// CSV with a two-line commented header: table kind and schema version, then
// the resolved config as compact JSON.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::string_view kind, const Json& config,
            const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& cells);
  void row(const std::vector<double>& cells);

 private:
  std::ostream& out_;
  std::size_t columns_;
};

// Shortest decimal form that round-trips.
std::string format_double(double v);

}  // namespace qndcount
