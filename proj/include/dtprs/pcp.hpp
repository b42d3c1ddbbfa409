#pragma once

#include <string>
#include <utility>
#include <vector>

namespace dtprs {

using PcpPairs = std::vector<std::pair<std::string, std::string>>;

struct PcpSystem {
  std::string source;  // .dtprs text
  std::string target;  // .dtp text, the success marker pattern
};

// Encodes a PCP instance over {a, b}. A partial solution (U, V), V a proper prefix of U, is a
// root with one child per letter of U: [x]([in](@d_{i-1}), [out](@d_i)) with pairwise distinct
// d_i. Tag x is the letter, suffixed by # at the first position of U beyond V and by $ at the
// last position. The first pair builds the initial tree, every pair but the last extends it,
// and the last pair closes a solution by renaming the root to √.
// Solutions are assumed to start with the first pair and end with the last one, with V
// staying a prefix of U along the way.
PcpSystem gen_pcp(const PcpPairs& pairs);

}  // namespace dtprs
