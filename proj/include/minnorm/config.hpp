#pragma once

#include <istream>
#include <map>
#include <string>
#include <vector>

#include "minnorm/experiment.hpp"

namespace minnorm {

/// Flat key = value file. '#' starts a comment; blank lines are ignored;
/// keys are case-sensitive; a repeated key keeps the last value.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::istream& in, const std::string& source_name = "config");
KeyValues load_key_values(const std::string& path);

/// "0,50,100" or "start:stop:step" (stop inclusive).
std::vector<Index> parse_index_list(const std::string& text);

double parse_double(const std::string& key, const std::string& text);
long long parse_integer(const std::string& key, const std::string& text);
bool parse_bool(const std::string& key, const std::string& text);

/// Applies keys design, p, n2, n1_grid, snr, ssr, kappa, sigma_sq, reps, seed,
/// raw_fig2_scaling, threads. Unknown keys are an InputError.
void apply_experiment_keys(ExperimentConfig& cfg, const KeyValues& kv);

}  // namespace minnorm
