// Copyright 2026 The Storyworld Authors
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

#include "storyworld/analysis.hpp"
#include "storyworld/conveyance.hpp"
#include "storyworld/error.hpp"
#include "storyworld/logic.hpp"
#include "storyworld/metrics.hpp"
#include "storyworld/model_space.hpp"
#include "storyworld/plausibility.hpp"
#include "storyworld/rational.hpp"
#include "storyworld/story.hpp"
