// Copyright 2026 The modloco Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MODLOCO_MORPHOLOGY_H_
#define MODLOCO_MORPHOLOGY_H_

#include <compare>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace modloco {

enum class ModuleKind { kCore, kBrick, kActiveJoint };

// Attachment faces are expressed in the body frame: North is the camera
// direction of the core module.
enum class Face { kNorth, kEast, kSouth, kWest };

enum class Side { kLeft, kMiddle, kRight };

struct Module {
  std::string id;
  ModuleKind kind = ModuleKind::kBrick;
};

struct Attachment {
  std::string parent;
  std::string child;
  Face face = Face::kNorth;
};

// A modular robot as a tree of modules rooted at the core.
struct BodyGraph {
  std::string name;
  std::vector<Module> modules;
  std::vector<Attachment> attachments;
};

// Grid position in module units: east-west first, north-south second.
struct GridCoord {
  int east = 0;
  int north = 0;
  auto operator<=>(const GridCoord&) const = default;
};

struct JointInfo {
  std::string id;
  GridCoord coord;
  Side side = Side::kMiddle;
};

// Undirected CPG connection; a < b index into CpgTopology::joints.
struct CpgEdge {
  int a = 0;
  int b = 0;
  auto operator<=>(const CpgEdge&) const = default;
};

struct CpgTopology {
  std::string robot;
  std::vector<JointInfo> joints;
  std::vector<CpgEdge> edges;

  int num_joints() const { return static_cast<int>(joints.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int genome_dimension() const { return num_joints() + num_edges(); }
  std::vector<Side> sides() const;
};

enum class ViolationKind {
  kMissingCore,
  kDuplicateCore,
  kDuplicateId,
  kUnknownModule,
  kMultipleParents,
  kCoreHasParent,
  kFaceReuse,
  kCycle,
  kDisconnected,
  kCoordinateCollision,
};

struct Violation {
  ViolationKind kind;
  std::string detail;
};

std::string_view to_string(ViolationKind kind);
std::string_view to_string(Side side);
std::string_view to_string(Face face);

Side side_of(GridCoord coord);
GridCoord face_offset(Face face);

// Returns every structural problem of `body`; empty iff the body is a valid
// tree with exactly one core and non-overlapping modules.
std::vector<Violation> validate(const BodyGraph& body);

// Grid coordinates of every module reachable from the core. Throws
// MalformedBodyError on any violation.
std::map<std::string, GridCoord> module_coordinates(const BodyGraph& body);

// Grid coordinates of the active joints only.
std::map<std::string, GridCoord> assign_coordinates(const BodyGraph& body);

// Joints ordered by (east, north, id); two joints are connected iff the tree
// path between them contains no other active joint.
CpgTopology cpg_topology(const BodyGraph& body);

// Hand-encoded spider, gecko and baby bodies.
BodyGraph preset(std::string_view name);
const std::vector<std::string>& preset_names();

// Swaps East and West attachments, i.e. reflects the body across its
// north-south axis.
BodyGraph mirror_east_west(const BodyGraph& body);

// Body description files.
BodyGraph body_from_json(const nlohmann::json& j);
nlohmann::json body_to_json(const BodyGraph& body);
BodyGraph load_body(const std::filesystem::path& path);

// A preset name or a path to a body description file.
BodyGraph resolve_body(const std::string& name_or_path);

}  // namespace modloco

#endif  // MODLOCO_MORPHOLOGY_H_
