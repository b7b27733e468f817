#pragma once

// Artifact formats. CSV for series, JSON for summaries; reals in CSV carry
// 17 significant digits so doubles round-trip.

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "qwork/coherence.hpp"
#include "qwork/protocol.hpp"
#include "qwork/verify.hpp"
#include "qwork/weight.hpp"

namespace qwork::io {

using nlohmann::json;

std::string format_real(double x);

/// Header `offset,mass`, ascending offsets.
void write_ledger_csv(std::ostream& os, const weight::WeightLedger& ledger);
/// Reads what write_ledger_csv wrote. Throws InvalidParameters on malformed rows.
weight::WeightLedger read_ledger_csv(std::istream& is, const weight::Grid& grid = weight::Grid::continuous(),
                                     double merge_tol = 0.0);

/// Header `k,r_k,E_B_k,work_increment,cumulative_work`.
void write_trace_csv(std::ostream& os, const protocol::ProtocolTrace& trace);

json ledger_json(const weight::WeightLedger& ledger);
/// Mean, variance and probability of each conditional (per initial level) ledger.
json peaks_json(const protocol::ProtocolTrace& trace);
json blocks_json(const coherence::BlockDecomposition& blocks);
json report_json(const verify::VerificationReport& report);

/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace qwork::io
