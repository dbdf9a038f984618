#pragma once

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "satevo/evolution.hpp"

namespace satevo {

/// Column layout of the per-generation trace. Files start with a '#'
/// comment naming the RNG algorithm, then this header, then one row per
/// sampled generation.
inline constexpr const char* kTraceCsvHeader =
    "generation,score,decisions,propagations,clauses,accepted,status,event";

inline void write_trace_csv_header(std::ostream& out,
                                   const std::string& rng_algorithm) {
  out << "# rng_algorithm=" << rng_algorithm << '\n'
      << kTraceCsvHeader << '\n';
}

inline void write_trace_csv_row(std::ostream& out,
                                const GenerationRecord& record) {
  out << record.generation << ',' << record.score_value << ','
      << record.decisions << ',' << record.propagations << ','
      << record.clause_count << ',' << (record.accepted ? 1 : 0) << ','
      << to_string(record.status) << ',' << to_string(record.event) << '\n';
}

inline void write_trace_csv(std::ostream& out, const EvolutionTrace& trace) {
  write_trace_csv_header(out, trace.rng_algorithm);
  for (const GenerationRecord& record : trace.records)
    write_trace_csv_row(out, record);
}

namespace detail {

inline std::vector<std::string> split_csv_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  return fields;
}

inline std::uint64_t parse_u64_field(const std::string& field,
                                     std::size_t row) {
  try {
    return std::stoull(field);
  } catch (const std::exception&) {
    throw std::runtime_error("trace csv row " + std::to_string(row) +
                             ": expected integer, got '" + field + "'");
  }
}

}  // namespace detail

/// Parses a file produced by write_trace_csv back into records.
inline EvolutionTrace parse_trace_csv(std::istream& in) {
  EvolutionTrace trace;
  trace.rng_algorithm.clear();
  std::string line;
  bool saw_header = false;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto pos = line.find("rng_algorithm=");
      if (pos != std::string::npos)
        trace.rng_algorithm = line.substr(pos + 14);
      continue;
    }
    if (!saw_header) {
      if (line != kTraceCsvHeader)
        throw std::runtime_error("trace csv: unexpected header '" + line +
                                 "'");
      saw_header = true;
      continue;
    }
    const auto fields = detail::split_csv_fields(line);
    if (fields.size() != 8)
      throw std::runtime_error("trace csv row " + std::to_string(row) +
                               ": expected 8 fields, got " +
                               std::to_string(fields.size()));
    GenerationRecord record;
    record.generation = detail::parse_u64_field(fields[0], row);
    record.score_value = detail::parse_u64_field(fields[1], row);
    record.decisions = detail::parse_u64_field(fields[2], row);
    record.propagations = detail::parse_u64_field(fields[3], row);
    record.clause_count = detail::parse_u64_field(fields[4], row);
    record.accepted = fields[5] == "1";
    const auto status = solve_status_from_string(fields[6]);
    if (!status)
      throw std::runtime_error("trace csv row " + std::to_string(row) +
                               ": unknown status '" + fields[6] + "'");
    record.status = *status;
    if (fields[7] == "NORMAL") {
      record.event = GenerationEvent::normal;
    } else if (fields[7] == "BREAK") {
      record.event = GenerationEvent::break_move;
    } else {
      throw std::runtime_error("trace csv row " + std::to_string(row) +
                               ": unknown event '" + fields[7] + "'");
    }
    trace.records.push_back(record);
  }
  if (!saw_header)
    throw std::runtime_error("trace csv: missing header row");
  return trace;
}

}  // namespace satevo
