#pragma once

#include <map>
#include <string>

#include "pvae/model/model.hpp"

namespace pvae::model {

/// Contents of a checkpoint: the model plus its key=value metadata block.
struct Checkpoint {
  Model model;
  std::map<std::string, std::string> meta;
};

/// Writes "PVAE1", the array count (u32), then per array: name length (u32),
/// name, rank (u32), dims (u32 each), little-endian doubles. A trailing block
/// (u32 length + UTF-8 text) holds the model config and `meta` as key=value
/// lines. Keys must not contain '=' or newlines; values must not contain newlines.
void save_checkpoint(const std::string& path, const Model& model, const std::map<std::string, std::string>& meta);

/// Throws IoError when unreadable and DataError when the file is malformed.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace pvae::model
