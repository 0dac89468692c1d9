#pragma once

#include <string>

#include "hee/model.hpp"

namespace hee {

struct Checkpoint {
  ModelSpec spec;
  Params params;
};

/// Serializes to the version-1 checkpoint document
/// `{version, spec: {L, sizes, families, activation}, eta_top, theta}`.
/// Each theta entry is one weight matrix flattened row-major.
std::string checkpoint_to_json(const ModelSpec& spec, const Params& params);

/// Throws ConfigError on a malformed document.
Checkpoint checkpoint_from_json(const std::string& text);

/// File variants; throw IoError when the file cannot be read or written.
void save_checkpoint(const std::string& path, const ModelSpec& spec, const Params& params);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace hee
