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

#include <algorithm>
#include <doctest.h>

#include "modloco/error.h"
#include "modloco/morphology.h"

using namespace modloco;

namespace {

BodyGraph core_only() { return {"core_only", {{"core", ModuleKind::kCore}}, {}}; }

int count_side(const CpgTopology& t, Side s) {
  return static_cast<int>(std::count_if(t.joints.begin(), t.joints.end(),
                                        [s](const JointInfo& j) { return j.side == s; }));
}

bool has_kind(const std::vector<Violation>& v, ViolationKind k) {
  return std::any_of(v.begin(), v.end(), [k](const Violation& x) { return x.kind == k; });
}

}  // namespace

TEST_CASE("preset genome dimensions") {
  struct Row {
    const char* name;
    int joints, edges;
  };
  for (Row r : {Row{"spider", 8, 10}, Row{"gecko", 6, 7}, Row{"baby", 7, 9}}) {
    CAPTURE(r.name);
    const CpgTopology t = cpg_topology(preset(r.name));
    CHECK(t.num_joints() == r.joints);
    CHECK(t.num_edges() == r.edges);
    CHECK(t.genome_dimension() == r.joints + r.edges);
  }
}

TEST_CASE("presets validate and partition their joints by side") {
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    const BodyGraph body = preset(name);
    CHECK(validate(body).empty());
    const CpgTopology t = cpg_topology(body);
    CHECK(count_side(t, Side::kLeft) + count_side(t, Side::kMiddle) +
              count_side(t, Side::kRight) ==
          t.num_joints());
    for (const auto& e : t.edges) {
      CHECK(e.a < e.b);
      CHECK(e.b < t.num_joints());
    }
    CHECK(std::adjacent_find(t.edges.begin(), t.edges.end()) == t.edges.end());
  }
}

TEST_CASE("spider east limb starts at (1,0)") {
  const auto coords = assign_coordinates(preset("spider"));
  CHECK(coords.size() == 8);
  bool found = false;
  for (const auto& [id, c] : coords) found |= (c == GridCoord{1, 0});
  CHECK(found);
  const CpgTopology t = cpg_topology(preset("spider"));
  CHECK(count_side(t, Side::kLeft) == count_side(t, Side::kRight));
}

TEST_CASE("baby has the long limb on the right") {
  const CpgTopology t = cpg_topology(preset("baby"));
  CHECK(count_side(t, Side::kRight) > count_side(t, Side::kLeft));
}

TEST_CASE("single core has no joints") {
  CHECK(assign_coordinates(core_only()).empty());
  CHECK(cpg_topology(core_only()).genome_dimension() == 0);
}

TEST_CASE("joint on the west face") {
  BodyGraph b = core_only();
  b.modules.push_back({"j", ModuleKind::kActiveJoint});
  b.attachments.push_back({"core", "j", Face::kWest});
  const auto coords = assign_coordinates(b);
  REQUIRE(coords.count("j") == 1);
  CHECK(coords.at("j") == GridCoord{-1, 0});
  const CpgTopology t = cpg_topology(b);
  REQUIRE(t.num_joints() == 1);
  CHECK(t.joints[0].side == Side::kLeft);
}

TEST_CASE("two cores") {
  BodyGraph b = core_only();
  b.modules.push_back({"core2", ModuleKind::kCore});
  b.attachments.push_back({"core", "core2", Face::kNorth});
  const auto v = validate(b);
  CHECK(has_kind(v, ViolationKind::kDuplicateCore));
  CHECK_THROWS_AS(assign_coordinates(b), MalformedBodyError);
}

TEST_CASE("loop-back body collides with the core") {
  BodyGraph b = core_only();
  for (const char* id : {"b1", "b2", "b3", "b4"}) b.modules.push_back({id, ModuleKind::kBrick});
  b.attachments = {{"core", "b1", Face::kEast},
                   {"b1", "b2", Face::kNorth},
                   {"b2", "b3", Face::kWest},
                   {"b3", "b4", Face::kSouth}};
  const auto v = validate(b);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == ViolationKind::kCoordinateCollision);
  CHECK_THROWS_AS(cpg_topology(b), MalformedBodyError);
}

TEST_CASE("structural violations") {
  SUBCASE("missing core") {
    BodyGraph b{"x", {{"a", ModuleKind::kBrick}}, {}};
    CHECK(has_kind(validate(b), ViolationKind::kMissingCore));
  }
  SUBCASE("unknown module") {
    BodyGraph b = core_only();
    b.attachments.push_back({"core", "ghost", Face::kNorth});
    CHECK(has_kind(validate(b), ViolationKind::kUnknownModule));
  }
  SUBCASE("face reuse") {
    BodyGraph b = core_only();
    b.modules.push_back({"a", ModuleKind::kBrick});
    b.modules.push_back({"c", ModuleKind::kBrick});
    b.attachments = {{"core", "a", Face::kNorth}, {"core", "c", Face::kNorth}};
    CHECK(has_kind(validate(b), ViolationKind::kFaceReuse));
  }
  SUBCASE("disconnected") {
    BodyGraph b = core_only();
    b.modules.push_back({"a", ModuleKind::kBrick});
    CHECK(has_kind(validate(b), ViolationKind::kDisconnected));
  }
  SUBCASE("duplicate id") {
    BodyGraph b = core_only();
    b.modules.push_back({"core", ModuleKind::kBrick});
    CHECK(has_kind(validate(b), ViolationKind::kDuplicateId));
  }
}

TEST_CASE("mirroring swaps left and right") {
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    const CpgTopology t = cpg_topology(preset(name));
    const CpgTopology m = cpg_topology(mirror_east_west(preset(name)));
    CHECK(count_side(m, Side::kLeft) == count_side(t, Side::kRight));
    CHECK(count_side(m, Side::kRight) == count_side(t, Side::kLeft));
    CHECK(count_side(m, Side::kMiddle) == count_side(t, Side::kMiddle));
    CHECK(m.num_edges() == t.num_edges());
    for (const auto& j : t.joints) {
      auto it = std::find_if(m.joints.begin(), m.joints.end(),
                             [&](const JointInfo& k) { return k.id == j.id; });
      REQUIRE(it != m.joints.end());
      CHECK(it->coord == GridCoord{-j.coord.east, j.coord.north});
    }
  }
}

TEST_CASE("topology is deterministic and survives a JSON round trip") {
  const BodyGraph body = preset("gecko");
  const CpgTopology a = cpg_topology(body);
  const CpgTopology b = cpg_topology(body_from_json(body_to_json(body)));
  REQUIRE(a.num_joints() == b.num_joints());
  for (int i = 0; i < a.num_joints(); ++i) {
    CHECK(a.joints[i].id == b.joints[i].id);
    CHECK(a.joints[i].coord == b.joints[i].coord);
  }
  CHECK(a.edges == b.edges);
}

TEST_CASE("unknown preset") { CHECK_THROWS_AS(preset("octopus"), LookupError); }

TEST_CASE("malformed body file") {
  CHECK_THROWS_AS(body_from_json(nlohmann::json{{"name", "x"}}), InputError);
}
