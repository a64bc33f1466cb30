#ifndef SPECMATCH_SERIALIZATION_HPP
#define SPECMATCH_SERIALIZATION_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "channel_model.hpp"
#include "equilibrium.hpp"
#include "mechanisms.hpp"
#include "simulation.hpp"

namespace specmatch {

// Instance files are self-describing text with gains in dB (noise in dBm);
// values convert to linear ratios once on ingestion.
void write_instance(std::ostream& os, const NetworkInstance& inst);
void save_instance(const NetworkInstance& inst, const std::string& path);
NetworkInstance read_instance(std::istream& is);
NetworkInstance load_instance(const std::string& path);

// Matching files: one `m <idx> n <idx> p <float> t <float> delta <float>`
// record per matched pair; `#` starts a comment.
void write_matching(std::ostream& os, const Matching& matching);
void save_matching(const Matching& matching, const std::string& path);
Matching read_matching(std::istream& is, int pu_count, int su_count);
Matching load_matching(const std::string& path, int pu_count, int su_count);

// Mechanism trace export: `round,actor,action,target,value` lines.
void write_trace(std::ostream& os, const MechanismTrace& trace);
void save_trace(const MechanismTrace& trace, const std::string& path);

void write_rows_csv(std::ostream& os, const std::vector<ExperimentRow>& rows);
void save_rows_csv(const std::vector<ExperimentRow>& rows, const std::string& path);
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);
void save_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path);

}  // namespace specmatch

#endif
