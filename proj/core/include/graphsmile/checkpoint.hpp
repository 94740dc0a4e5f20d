#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "graphsmile/autograd.hpp"

namespace graphsmile {

inline constexpr int kCheckpointVersion = 1;

/// Serialises parameters as JSON: {"format", "version", "params": [{name,
/// rows, cols, values}]}. Doubles are written in shortest round-trip form,
/// so save/load is bit-exact.
std::string checkpoint_to_string(const std::vector<const Param*>& params);
void checkpoint_from_string(const std::string& text, const std::vector<Param*>& params);

void save_checkpoint(const std::filesystem::path& path, const std::vector<const Param*>& params);
/// Every param in `params` must be present with a matching shape; extra
/// entries in the file are an error too.
void load_checkpoint(const std::filesystem::path& path, const std::vector<Param*>& params);

}  // namespace graphsmile
