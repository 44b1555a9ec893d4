/*
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
#pragma once

#include "driftws/core.hpp"
#include "driftws/corrwin.hpp"
#include "driftws/adaptive.hpp"
#include "driftws/triplet.hpp"
#include "driftws/aggregate.hpp"
#include "driftws/driftgen.hpp"
#include "driftws/ingest.hpp"
#include "driftws/eval.hpp"
