#pragma once

#include <map>
#include <string>

#include "eegraph/params.hpp"
#include "eegraph/tensor.hpp"

namespace eegraph {

/// Flat binary checkpoint: header (magic "EGNN", version u32, count u32),
/// then per tensor a u32 name length, the UTF-8 name, u32 rank, u64 extents
/// and f64 values, all little-endian.
void save_checkpoint(const std::string& path, const ParamList& params);

/// Name -> tensor map; throws DataError on malformed files.
std::map<std::string, Tensor> load_checkpoint(const std::string& path);

/// Copies loaded values into matching params in place. Throws DataError on a
/// missing name or shape mismatch.
void restore_params(const ParamList& params,
                    const std::map<std::string, Tensor>& loaded);

}  // namespace eegraph
