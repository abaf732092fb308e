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

#include "modloco/morphology.h"

#include <algorithm>
#include <fstream>
#include <queue>
#include <set>
#include <unordered_map>

#include "modloco/error.h"

namespace modloco {
namespace {

using Json = nlohmann::json;

struct Indexed {
  std::unordered_map<std::string, int> index;
  std::vector<int> parent;                  // -1 for roots
  std::vector<std::vector<int>> children;
  std::vector<std::vector<int>> neighbors;  // undirected tree adjacency
  std::vector<Face> face;                   // face of the parent used
};

Indexed index_body(const BodyGraph& body) {
  Indexed ix;
  const int n = static_cast<int>(body.modules.size());
  for (int i = 0; i < n; ++i) ix.index.emplace(body.modules[i].id, i);
  ix.parent.assign(n, -1);
  ix.children.resize(n);
  ix.neighbors.resize(n);
  ix.face.assign(n, Face::kNorth);
  for (const auto& a : body.attachments) {
    auto p = ix.index.find(a.parent);
    auto c = ix.index.find(a.child);
    if (p == ix.index.end() || c == ix.index.end()) continue;
    if (p->second == c->second) continue;
    if (ix.parent[c->second] != -1) continue;
    ix.parent[c->second] = p->second;
    ix.face[c->second] = a.face;
    ix.children[p->second].push_back(c->second);
    ix.neighbors[p->second].push_back(c->second);
    ix.neighbors[c->second].push_back(p->second);
  }
  return ix;
}

int find_core(const BodyGraph& body) {
  for (int i = 0; i < static_cast<int>(body.modules.size()); ++i)
    if (body.modules[i].kind == ModuleKind::kCore) return i;
  return -1;
}

Face parse_face(const std::string& s) {
  if (s == "N") return Face::kNorth;
  if (s == "E") return Face::kEast;
  if (s == "S") return Face::kSouth;
  if (s == "W") return Face::kWest;
  throw InputError("unknown attachment face '" + s + "'");
}

ModuleKind parse_kind(const std::string& s) {
  if (s == "core") return ModuleKind::kCore;
  if (s == "brick") return ModuleKind::kBrick;
  if (s == "joint") return ModuleKind::kActiveJoint;
  throw InputError("unknown module kind '" + s + "'");
}

std::string_view kind_name(ModuleKind k) {
  switch (k) {
    case ModuleKind::kCore: return "core";
    case ModuleKind::kBrick: return "brick";
    case ModuleKind::kActiveJoint: return "joint";
  }
  return "brick";
}

}  // namespace

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kMissingCore: return "missing-core";
    case ViolationKind::kDuplicateCore: return "duplicate-core";
    case ViolationKind::kDuplicateId: return "duplicate-id";
    case ViolationKind::kUnknownModule: return "unknown-module";
    case ViolationKind::kMultipleParents: return "multiple-parents";
    case ViolationKind::kCoreHasParent: return "core-has-parent";
    case ViolationKind::kFaceReuse: return "face-reuse";
    case ViolationKind::kCycle: return "cycle";
    case ViolationKind::kDisconnected: return "disconnected";
    case ViolationKind::kCoordinateCollision: return "coordinate-collision";
  }
  return "unknown";
}

std::string_view to_string(Side side) {
  switch (side) {
    case Side::kLeft: return "left";
    case Side::kMiddle: return "middle";
    case Side::kRight: return "right";
  }
  return "middle";
}

std::string_view to_string(Face face) {
  switch (face) {
    case Face::kNorth: return "N";
    case Face::kEast: return "E";
    case Face::kSouth: return "S";
    case Face::kWest: return "W";
  }
  return "N";
}

Side side_of(GridCoord coord) {
  if (coord.east < 0) return Side::kLeft;
  if (coord.east > 0) return Side::kRight;
  return Side::kMiddle;
}

GridCoord face_offset(Face face) {
  switch (face) {
    case Face::kNorth: return {0, 1};
    case Face::kEast: return {1, 0};
    case Face::kSouth: return {0, -1};
    case Face::kWest: return {-1, 0};
  }
  return {0, 0};
}

std::vector<Side> CpgTopology::sides() const {
  std::vector<Side> out;
  out.reserve(joints.size());
  for (const auto& j : joints) out.push_back(j.side);
  return out;
}

std::vector<Violation> validate(const BodyGraph& body) {
  std::vector<Violation> out;
  const int n = static_cast<int>(body.modules.size());

  int cores = 0;
  for (const auto& m : body.modules)
    if (m.kind == ModuleKind::kCore) ++cores;
  if (cores == 0) out.push_back({ViolationKind::kMissingCore, "no core module"});
  if (cores > 1)
    out.push_back({ViolationKind::kDuplicateCore,
                   std::to_string(cores) + " core modules"});

  std::set<std::string> seen;
  for (const auto& m : body.modules)
    if (!seen.insert(m.id).second)
      out.push_back({ViolationKind::kDuplicateId, m.id});

  std::unordered_map<std::string, int> index;
  for (int i = 0; i < n; ++i) index.emplace(body.modules[i].id, i);

  std::vector<int> parent_count(n, 0);
  std::set<std::pair<std::string, Face>> used_faces;
  for (const auto& a : body.attachments) {
    auto p = index.find(a.parent);
    auto c = index.find(a.child);
    if (p == index.end() || c == index.end()) {
      out.push_back({ViolationKind::kUnknownModule,
                     p == index.end() ? a.parent : a.child});
      continue;
    }
    if (p->second == c->second) {
      out.push_back({ViolationKind::kCycle, a.child + " attached to itself"});
      continue;
    }
    if (!used_faces.insert({a.parent, a.face}).second)
      out.push_back({ViolationKind::kFaceReuse,
                     a.parent + ":" + std::string(to_string(a.face))});
    if (body.modules[c->second].kind == ModuleKind::kCore)
      out.push_back({ViolationKind::kCoreHasParent, a.child});
    if (++parent_count[c->second] == 2)
      out.push_back({ViolationKind::kMultipleParents, a.child});
  }

  const Indexed ix = index_body(body);

  // Cycles: walk parent pointers from every module.
  std::vector<int> state(n, 0);  // 0 unvisited, 1 on stack, 2 done
  for (int start = 0; start < n; ++start) {
    std::vector<int> path;
    int v = start;
    while (v != -1 && state[v] == 0) {
      state[v] = 1;
      path.push_back(v);
      v = ix.parent[v];
    }
    if (v != -1 && state[v] == 1)
      out.push_back({ViolationKind::kCycle, body.modules[v].id});
    for (int p : path) state[p] = 2;
  }

  const int core = find_core(body);
  if (core < 0) return out;

  std::vector<GridCoord> coord(n);
  std::vector<bool> reached(n, false);
  std::queue<int> q;
  q.push(core);
  reached[core] = true;
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int c : ix.children[v]) {
      if (reached[c]) continue;
      reached[c] = true;
      const GridCoord off = face_offset(ix.face[c]);
      coord[c] = {coord[v].east + off.east, coord[v].north + off.north};
      q.push(c);
    }
  }
  for (int i = 0; i < n; ++i)
    if (!reached[i])
      out.push_back({ViolationKind::kDisconnected, body.modules[i].id});

  std::map<GridCoord, int> occupied;
  for (int i = 0; i < n; ++i) {
    if (!reached[i]) continue;
    auto [it, fresh] = occupied.emplace(coord[i], i);
    if (!fresh)
      out.push_back({ViolationKind::kCoordinateCollision,
                     body.modules[it->second].id + "," + body.modules[i].id +
                         " at (" + std::to_string(coord[i].east) + "," +
                         std::to_string(coord[i].north) + ")"});
  }
  return out;
}

std::map<std::string, GridCoord> module_coordinates(const BodyGraph& body) {
  const auto violations = validate(body);
  if (!violations.empty()) {
    std::string msg = "malformed body '" + body.name + "':";
    for (const auto& v : violations)
      msg += " " + std::string(to_string(v.kind)) + "(" + v.detail + ")";
    throw MalformedBodyError(msg);
  }
  const Indexed ix = index_body(body);
  const int core = find_core(body);
  std::map<std::string, GridCoord> out;
  std::vector<GridCoord> coord(body.modules.size());
  std::queue<int> q;
  q.push(core);
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    out[body.modules[v].id] = coord[v];
    for (int c : ix.children[v]) {
      const GridCoord off = face_offset(ix.face[c]);
      coord[c] = {coord[v].east + off.east, coord[v].north + off.north};
      q.push(c);
    }
  }
  return out;
}

std::map<std::string, GridCoord> assign_coordinates(const BodyGraph& body) {
  auto all = module_coordinates(body);
  std::map<std::string, GridCoord> joints;
  for (const auto& m : body.modules)
    if (m.kind == ModuleKind::kActiveJoint) joints[m.id] = all.at(m.id);
  return joints;
}

CpgTopology cpg_topology(const BodyGraph& body) {
  const auto coords = assign_coordinates(body);
  CpgTopology topo;
  topo.robot = body.name;
  for (const auto& [id, c] : coords) topo.joints.push_back({id, c, side_of(c)});
  std::sort(topo.joints.begin(), topo.joints.end(),
            [](const JointInfo& a, const JointInfo& b) {
              if (a.coord != b.coord) return a.coord < b.coord;
              return a.id < b.id;
            });

  const Indexed ix = index_body(body);
  std::vector<int> joint_slot(body.modules.size(), -1);
  for (int k = 0; k < topo.num_joints(); ++k)
    joint_slot[ix.index.at(topo.joints[k].id)] = k;

  // From each joint, flood the tree without passing through other joints.
  std::set<CpgEdge> edges;
  for (int k = 0; k < topo.num_joints(); ++k) {
    const int src = ix.index.at(topo.joints[k].id);
    std::vector<bool> seen(body.modules.size(), false);
    std::queue<int> q;
    q.push(src);
    seen[src] = true;
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (int w : ix.neighbors[v]) {
        if (seen[w]) continue;
        seen[w] = true;
        if (joint_slot[w] >= 0) {
          const int other = joint_slot[w];
          edges.insert({std::min(k, other), std::max(k, other)});
        } else {
          q.push(w);
        }
      }
    }
  }
  topo.edges.assign(edges.begin(), edges.end());
  return topo;
}

BodyGraph mirror_east_west(const BodyGraph& body) {
  BodyGraph out = body;
  for (auto& a : out.attachments) {
    if (a.face == Face::kEast)
      a.face = Face::kWest;
    else if (a.face == Face::kWest)
      a.face = Face::kEast;
  }
  return out;
}

BodyGraph body_from_json(const Json& j) {
  BodyGraph body;
  try {
    body.name = j.at("name").get<std::string>();
    for (const auto& m : j.at("modules"))
      body.modules.push_back(
          {m.at("id").get<std::string>(), parse_kind(m.at("kind").get<std::string>())});
    for (const auto& a : j.at("attachments"))
      body.attachments.push_back({a.at("parent").get<std::string>(),
                                  a.at("child").get<std::string>(),
                                  parse_face(a.at("face").get<std::string>())});
  } catch (const Json::exception& e) {
    throw InputError(std::string("body description: ") + e.what());
  }
  return body;
}

Json body_to_json(const BodyGraph& body) {
  Json modules = Json::array();
  for (const auto& m : body.modules)
    modules.push_back({{"id", m.id}, {"kind", kind_name(m.kind)}});
  Json attachments = Json::array();
  for (const auto& a : body.attachments)
    attachments.push_back(
        {{"parent", a.parent}, {"child", a.child}, {"face", to_string(a.face)}});
  return {{"name", body.name}, {"modules", modules}, {"attachments", attachments}};
}

BodyGraph load_body(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open body file " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return body_from_json(j);
}

BodyGraph resolve_body(const std::string& name_or_path) {
  const auto& names = preset_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end())
    return preset(name_or_path);
  if (std::filesystem::exists(name_or_path)) return load_body(name_or_path);
  throw LookupError("unknown robot '" + name_or_path +
                    "' (not a preset and no such file)");
}

}  // namespace modloco
