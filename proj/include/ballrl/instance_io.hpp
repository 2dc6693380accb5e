#pragma once

#include <filesystem>
#include <string>

#include "ballrl/mdp.hpp"

namespace ballrl {

inline constexpr const char* kInstanceFormat = "ballrl-instance";
inline constexpr int kInstanceVersion = 1;

/// Serializes an instance as pretty-printed JSON. Doubles are written in
/// shortest round-trip form, so write → read reproduces every bit.
std::string instance_to_json(const LinearQStarMdp& mdp);

/// Parses and validates an instance. Throws FormatError with a readable reason.
LinearQStarMdp instance_from_json(const std::string& text);

void save_instance(const LinearQStarMdp& mdp, const std::filesystem::path& path);
LinearQStarMdp load_instance(const std::filesystem::path& path);

}  // namespace ballrl
