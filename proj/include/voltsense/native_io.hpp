#pragma once

#include <string>
#include <vector>

#include "voltsense/netmodel.hpp"
#include "voltsense/sampling.hpp"

namespace vsp::net {

// A fully specified study: network with limits applied, topology
// configurations (always at least the as-given one), and the injection box.
struct NativeCase {
  Network network;
  std::vector<Configuration> configurations;
  sampling::InjectionRange range;
};

// Parses the native JSON case document. Schema violations report the JSON
// field path; configurations that disconnect the network are rejected by name.
NativeCase load_native(const std::string& text);

// Inverse of load_native for the fields it covers. Line indices in
// configuration overrides are 1-based in the document.
std::string serialize_native(const Network& net,
                             const std::vector<Configuration>& configurations,
                             const sampling::InjectionRange& range);

}  // namespace vsp::net
