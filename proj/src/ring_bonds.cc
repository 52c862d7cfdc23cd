#include "mantra/ring_bonds.h"

#include <algorithm>
#include <cctype>
#include <set>

namespace mantra {

RingPairing check_ring_pairing(std::string_view smiles) {
  std::set<int> open;
  auto toggle = [&](int label) {
    if (!open.erase(label)) open.insert(label);
  };
  bool in_bracket = false;
  for (std::size_t i = 0; i < smiles.size(); ++i) {
    char c = smiles[i];
    if (in_bracket) {
      in_bracket = c != ']';
      continue;
    }
    if (c == '[') {
      in_bracket = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      toggle(c - '0');
    } else if (c == '%' && i + 2 < smiles.size() && std::isdigit(static_cast<unsigned char>(smiles[i + 1])) &&
               std::isdigit(static_cast<unsigned char>(smiles[i + 2]))) {
      toggle((smiles[i + 1] - '0') * 10 + (smiles[i + 2] - '0'));
      i += 2;
    }
  }
  RingPairing out;
  out.unpaired.assign(open.begin(), open.end());
  out.paired = out.unpaired.empty();
  return out;
}

}  // namespace mantra
