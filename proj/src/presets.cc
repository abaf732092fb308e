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

#include <string>
#include <string_view>
#include <vector>

#include "modloco/error.h"
#include "modloco/morphology.h"

namespace modloco {
namespace {

// Embedded body description files. One grid unit per module; limbs alternate
// joint and brick modules.

// Four two-joint limbs on the four faces of the core.
constexpr std::string_view kSpider = R"({
  "name": "spider",
  "modules": [
    {"id": "core", "kind": "core"},
    {"id": "n_j1", "kind": "joint"}, {"id": "n_b1", "kind": "brick"},
    {"id": "n_j2", "kind": "joint"}, {"id": "n_b2", "kind": "brick"},
    {"id": "e_j1", "kind": "joint"}, {"id": "e_b1", "kind": "brick"},
    {"id": "e_j2", "kind": "joint"}, {"id": "e_b2", "kind": "brick"},
    {"id": "s_j1", "kind": "joint"}, {"id": "s_b1", "kind": "brick"},
    {"id": "s_j2", "kind": "joint"}, {"id": "s_b2", "kind": "brick"},
    {"id": "w_j1", "kind": "joint"}, {"id": "w_b1", "kind": "brick"},
    {"id": "w_j2", "kind": "joint"}, {"id": "w_b2", "kind": "brick"}
  ],
  "attachments": [
    {"parent": "core", "child": "n_j1", "face": "N"},
    {"parent": "n_j1", "child": "n_b1", "face": "N"},
    {"parent": "n_b1", "child": "n_j2", "face": "N"},
    {"parent": "n_j2", "child": "n_b2", "face": "N"},
    {"parent": "core", "child": "e_j1", "face": "E"},
    {"parent": "e_j1", "child": "e_b1", "face": "E"},
    {"parent": "e_b1", "child": "e_j2", "face": "E"},
    {"parent": "e_j2", "child": "e_b2", "face": "E"},
    {"parent": "core", "child": "s_j1", "face": "S"},
    {"parent": "s_j1", "child": "s_b1", "face": "S"},
    {"parent": "s_b1", "child": "s_j2", "face": "S"},
    {"parent": "s_j2", "child": "s_b2", "face": "S"},
    {"parent": "core", "child": "w_j1", "face": "W"},
    {"parent": "w_j1", "child": "w_b1", "face": "W"},
    {"parent": "w_b1", "child": "w_j2", "face": "W"},
    {"parent": "w_j2", "child": "w_b2", "face": "W"}
  ]
})";

// Front legs on the core, a two-joint spine to the south, rear legs on the
// last spine brick.
constexpr std::string_view kGecko = R"({
  "name": "gecko",
  "modules": [
    {"id": "core", "kind": "core"},
    {"id": "fl_j", "kind": "joint"}, {"id": "fl_b", "kind": "brick"},
    {"id": "fr_j", "kind": "joint"}, {"id": "fr_b", "kind": "brick"},
    {"id": "sp_j1", "kind": "joint"}, {"id": "sp_b1", "kind": "brick"},
    {"id": "sp_j2", "kind": "joint"}, {"id": "sp_b2", "kind": "brick"},
    {"id": "rl_j", "kind": "joint"}, {"id": "rl_b", "kind": "brick"},
    {"id": "rr_j", "kind": "joint"}, {"id": "rr_b", "kind": "brick"}
  ],
  "attachments": [
    {"parent": "core", "child": "fl_j", "face": "W"},
    {"parent": "fl_j", "child": "fl_b", "face": "W"},
    {"parent": "core", "child": "fr_j", "face": "E"},
    {"parent": "fr_j", "child": "fr_b", "face": "E"},
    {"parent": "core", "child": "sp_j1", "face": "S"},
    {"parent": "sp_j1", "child": "sp_b1", "face": "S"},
    {"parent": "sp_b1", "child": "sp_j2", "face": "S"},
    {"parent": "sp_j2", "child": "sp_b2", "face": "S"},
    {"parent": "sp_b2", "child": "rl_j", "face": "W"},
    {"parent": "rl_j", "child": "rl_b", "face": "W"},
    {"parent": "sp_b2", "child": "rr_j", "face": "E"},
    {"parent": "rr_j", "child": "rr_b", "face": "E"}
  ]
})";

// Spider-like joints on all four core faces, a gecko-like spine, and a long
// three-joint right limb.
constexpr std::string_view kBaby = R"({
  "name": "baby",
  "modules": [
    {"id": "core", "kind": "core"},
    {"id": "n_j", "kind": "joint"}, {"id": "n_b", "kind": "brick"},
    {"id": "w_j", "kind": "joint"}, {"id": "w_b", "kind": "brick"},
    {"id": "e_j1", "kind": "joint"}, {"id": "e_b1", "kind": "brick"},
    {"id": "e_j2", "kind": "joint"}, {"id": "e_b2", "kind": "brick"},
    {"id": "e_j3", "kind": "joint"}, {"id": "e_b3", "kind": "brick"},
    {"id": "s_j1", "kind": "joint"}, {"id": "s_b1", "kind": "brick"},
    {"id": "s_j2", "kind": "joint"}, {"id": "s_b2", "kind": "brick"}
  ],
  "attachments": [
    {"parent": "core", "child": "n_j", "face": "N"},
    {"parent": "n_j", "child": "n_b", "face": "N"},
    {"parent": "core", "child": "w_j", "face": "W"},
    {"parent": "w_j", "child": "w_b", "face": "W"},
    {"parent": "core", "child": "e_j1", "face": "E"},
    {"parent": "e_j1", "child": "e_b1", "face": "E"},
    {"parent": "e_b1", "child": "e_j2", "face": "E"},
    {"parent": "e_j2", "child": "e_b2", "face": "E"},
    {"parent": "e_b2", "child": "e_j3", "face": "E"},
    {"parent": "e_j3", "child": "e_b3", "face": "E"},
    {"parent": "core", "child": "s_j1", "face": "S"},
    {"parent": "s_j1", "child": "s_b1", "face": "S"},
    {"parent": "s_b1", "child": "s_j2", "face": "S"},
    {"parent": "s_j2", "child": "s_b2", "face": "S"}
  ]
})";

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"spider", "gecko", "baby"};
  return names;
}

BodyGraph preset(std::string_view name) {
  std::string_view text;
  if (name == "spider")
    text = kSpider;
  else if (name == "gecko")
    text = kGecko;
  else if (name == "baby")
    text = kBaby;
  else
    throw LookupError("unknown robot preset '" + std::string(name) + "'");
  return body_from_json(nlohmann::json::parse(text));
}

}  // namespace modloco
