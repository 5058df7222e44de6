#pragma once

// JSON plumbing for the tool. Two kinds of documents:
//   * problem files: an instance description (source law, distortion
//     matrices, optional targets / aux channels / noisy stages / solver
//     knobs) that every subcommand consumes
//   * witness files: computed region points carrying enough state (aux rows
//     plus decode tables) to re-evaluate or simulate them later
// Parsing is strict: unknown fields anywhere are an InputError, so typos
// fail loudly instead of silently falling back to defaults.

#include <optional>
#include <string>

#include "sr/bounds_noncausal.hpp"
#include "sr/channels.hpp"
#include "sr/coding_sim.hpp"
#include "sr/rd_causal.hpp"
#include "sr/search.hpp"
#include "sr/source_spec.hpp"

namespace sr {

struct ProblemFile {
    std::optional<SourceSpec> source;     // capacity-only files may omit it
    std::optional<DistortionQuad> target; // absent keys inside mean "unconstrained"
    std::optional<CausalAuxChannel> aux_causal;
    std::optional<NcAuxChannel> aux_block;
    std::optional<StateChannel> channel1, channel2;
    SearchConfig search; // seed and workers are set by the caller, not the file
    SimConfig sim;       // likewise
};

ProblemFile load_problem_file(const std::string& path);
// `name` labels error messages (usually the file path)
ProblemFile parse_problem_text(const std::string& text, const std::string& name);

// One witness document holds a list of points plus the kind of computation
// that produced them, so a reload knows which evaluator to re-run. All
// points in a single run share the kind (it classifies the run, not a row).
struct CausalWitnessFile {
    std::string kind = "region-causal";
    std::vector<CausalRegionPoint> points;
};

struct NcWitnessFile {
    std::string kind; // inner / outer / z1-slack / y2-static / lossless-z1 / lossless-y2
    std::vector<NcRegionPoint> points;
};

std::string causal_witness_json(const CausalWitnessFile& w);
CausalWitnessFile load_causal_witness(const std::string& text);

std::string nc_witness_json(const NcWitnessFile& w);
NcWitnessFile load_nc_witness(const std::string& text);

// Shape checks for deserialized points against the instance they will be
// evaluated on: alphabet sizes line up and every decode-table entry is a
// valid reconstruction symbol. Throws InputError.
void check_causal_point(const SourceSpec& source, const CausalRegionPoint& pt);
void check_nc_point(const SourceSpec& source, const NcRegionPoint& pt);

// Report documents (write-only; nothing downstream reloads these).
std::string capacity_json(const CapacityResult& res, const std::string& mode);
std::string separation_json(const SeparationResult& res);
std::string sim_report_json(const SimReport& rep, const std::string& scheme);
std::string consistency_json(const ConsistencyReport& rep);

} // namespace sr
