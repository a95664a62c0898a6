// Copyright 2026 The Authors.
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
#include "netmirror/arm.hpp"

namespace netmirror {

std::string_view to_string(Arm arm) {
  switch (arm) {
    case Arm::Viz: return "Viz";
    case Arm::VizIdeo: return "VizIdeo";
    case Arm::IdeoRec: return "IdeoRec";
    case Arm::Control: return "Control";
  }
  return "Control";
}

std::string_view display_name(Arm arm) {
  switch (arm) {
    case Arm::Viz: return "Viz";
    case Arm::VizIdeo: return "Viz+Ideo";
    case Arm::IdeoRec: return "Ideo+Rec";
    case Arm::Control: return "Control";
  }
  return "Control";
}

std::optional<Arm> parse_arm(std::string_view s) {
  for (Arm a : {Arm::Viz, Arm::VizIdeo, Arm::IdeoRec, Arm::Control}) {
    if (s == to_string(a) || s == display_name(a)) return a;
  }
  return std::nullopt;
}

}  // namespace netmirror
