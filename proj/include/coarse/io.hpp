#pragma once

#include <json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "coarse/gallery.hpp"
#include "coarse/roe.hpp"
#include "coarse/witness.hpp"

namespace coarse::io {

// Floats print with 17 significant digits so that parsing reproduces the
// exact double; used by every serializer and by report tables.
std::string formatDouble(double v);

// JSON writer with formatDouble applied to every float payload (nlohmann's
// own dump would shorten them). Two-space indent, trailing newline.
std::string jsonDump(const nlohmann::ordered_json& j);

std::string readTextFile(const std::string& path);
void writeTextFile(const std::string& path, const std::string& content);
nlohmann::json parseJsonFile(const std::string& path);

// A space together with its named entourages, in file order.
struct SpaceBundle {
  SpacePtr space;
  std::vector<std::pair<std::string, EntouragePtr>> entourages;

  EntouragePtr find(const std::string& name) const;
  EntouragePtr require(const std::string& name) const;
  // Registers a relation under a fresh name; rejects collisions with a
  // different pair set, reuses the entry when the pairs already match.
  void add(const std::string& name, EntouragePtr t);
};

nlohmann::ordered_json spaceToJson(const SpaceBundle& b);
SpaceBundle spaceFromJson(const nlohmann::json& j);
SpaceBundle loadSpace(const std::string& path);
void saveSpace(const SpaceBundle& b, const std::string& path);

nlohmann::ordered_json groupToJson(const FiniteGroup& g);
FiniteGroup groupFromJson(const nlohmann::json& j);
FiniteGroup loadGroup(const std::string& path);

// Whitespace-separated "u v" lines over nonnegative integer vertices;
// blank lines and '#' comments allowed. The entourage is the diagonal
// together with both orientations of every edge.
SpaceWithEntourage loadEdgeList(const std::string& path);

// Witness-type artifacts share the envelope
//   {"type": "folner"|"l1"|"l2"|"kernel", "support": <entourage name>,
//    "data": {...}}.
// The support name must resolve in the accompanying space bundle.
std::string witnessTypeOf(const nlohmann::json& j);

nlohmann::ordered_json folnerToJson(const FolnerWitness& w,
                                    const std::string& support_name);
FolnerWitness folnerFromJson(const nlohmann::json& j, const SpaceBundle& b);

nlohmann::ordered_json l1ToJson(const L1Profile& p,
                                const std::string& support_name);
L1Profile l1FromJson(const nlohmann::json& j, const SpaceBundle& b);

nlohmann::ordered_json l2ToJson(const L2Profile& p,
                                const std::string& support_name);
L2Profile l2FromJson(const nlohmann::json& j, const SpaceBundle& b);

nlohmann::ordered_json kernelToJson(const KernelMatrix& k,
                                    const std::string& support_name);
KernelMatrix kernelFromJson(const nlohmann::json& j, const SpaceBundle& b);

// Operators: {"band": <entourage name>, "triples": [[x, y, re, im], ...]}
// with x, y point labels.
nlohmann::ordered_json operatorToJson(const BandedOperator& a,
                                      const std::string& band_name);
BandedOperator operatorFromJson(const nlohmann::json& j, const SpaceBundle& b);

}  // namespace coarse::io
