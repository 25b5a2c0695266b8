#pragma once

#include <string>
#include <vector>

#include "nilc/types.hpp"

namespace nilc {

/// Loads a JSONL dataset: one object per line with fields {text, label?}.
/// Unknown fields are ignored. An explicit "id" field, when present, must be
/// unique and equal to the record's position. Throws with the offending line
/// number on malformed records; throws "empty dataset" on zero records.
std::vector<Utterance> load_dataset(const std::string& path);
std::vector<Utterance> parse_dataset(std::istream& in, const std::string& origin);

/// Writes the dataset back out as JSONL ({text, label?} per line).
std::string serialize_dataset(const std::vector<Utterance>& data);

}  // namespace nilc
