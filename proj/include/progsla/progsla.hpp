// Copyright 2026 The progsla Authors
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

#include "progsla/cloudsim.hpp"
#include "progsla/config.hpp"
#include "progsla/downtime.hpp"
#include "progsla/error.hpp"
#include "progsla/geotemporal.hpp"
#include "progsla/io.hpp"
#include "progsla/pipeline.hpp"
#include "progsla/rng.hpp"
#include "progsla/selection.hpp"
#include "progsla/slamodel.hpp"
#include "progsla/tracestats.hpp"
#include "progsla/users.hpp"
