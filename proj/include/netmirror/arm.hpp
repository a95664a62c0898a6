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
#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace netmirror {

// Treatment arms. Control units are observed only and never get a session.
enum class Arm { Viz, VizIdeo, IdeoRec, Control };

inline constexpr std::array<Arm, 3> kTreatmentArms = {Arm::Viz, Arm::VizIdeo, Arm::IdeoRec};

// Wire names: "Viz", "VizIdeo", "IdeoRec", "Control".
std::string_view to_string(Arm arm);
// Display names used in reports: "Viz", "Viz+Ideo", "Ideo+Rec", "Control".
std::string_view display_name(Arm arm);
// Accepts wire or display names, case-sensitive.
std::optional<Arm> parse_arm(std::string_view s);

}  // namespace netmirror
