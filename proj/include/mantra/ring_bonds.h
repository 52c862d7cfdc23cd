#pragma once

#include <string_view>
#include <vector>

namespace mantra {

struct RingPairing {
  bool paired = true;
  std::vector<int> unpaired;  // ring-bond labels left open, ascending
};

/// Checks that every ring-closure label (single digit or %nn) outside
/// bracket atoms occurs an even number of times, i.e. opens and closes in
/// pairs.
RingPairing check_ring_pairing(std::string_view smiles);

}  // namespace mantra
