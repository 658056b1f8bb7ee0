#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "shmm/binning.hpp"
#include "shmm/hmm.hpp"
#include "shmm/moments.hpp"

namespace shmm {

// Model files are JSON objects {k, d, T, O, pi} with T and O as nested
// row-major arrays of probabilities. Loading validates stochasticity and
// throws std::runtime_error with the violation list on failure.
HmmModel load_model(const std::string& path);
void save_model(const HmmModel& model, const std::string& path);

// Bundled demo models, keyed "k2d3", "k2d6", "k3d8", "k3d10".
std::vector<std::string> builtin_model_names();
HmmModel builtin_model(const std::string& name);
bool is_builtin_model(const std::string& name);

// Triples: one "x1 x2 x3" line per record, 1-indexed symbols.
void save_triples(const TripleSet& triples, const std::string& path);
TripleSet load_triples(const std::string& path, int d);

// Real-valued sequences: one decimal value per line.
void save_reals(const RealSequence& values, const std::string& path);
RealSequence load_reals(const std::string& path);

// Symbol sequences: one 1-indexed symbol per line.
void save_symbols(const ObservationSequence& seq, const std::string& path);
ObservationSequence load_symbols(const std::string& path, int d);

// Bin bounds with their convention identifier, as JSON.
void save_binspec(const BinSpec& spec, const std::string& path);
BinSpec load_binspec(const std::string& path);

// Moment dump for cross-implementation diffing: plain text, one header line
// per block ("name dims..."), then row-major values at full precision. The
// tensor block is slice-major in the middle symbol.
void save_moments(const MomentSet& moments, const std::string& path);
MomentSet load_moments(const std::string& path);

}  // namespace shmm
