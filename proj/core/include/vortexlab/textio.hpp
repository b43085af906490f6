#pragma once
#include <string>

namespace vlab {

// Shortest round-trip decimal form (std::to_chars). All text artifacts
// format doubles through this so identical values give identical bytes.
std::string format_double(double v);

// Strict full-string numeric parses; nullopt on any trailing junk.
bool parse_double_strict(const std::string& s, double& out);
bool parse_i64_strict(const std::string& s, long long& out);
bool parse_u64_strict(const std::string& s, unsigned long long& out);

std::string trim(const std::string& s);

} // namespace vlab
