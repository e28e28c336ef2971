// Copyright 2026 The SafeAug Authors
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

#ifndef SAFEAUG_SAFEAUG_HPP
#define SAFEAUG_SAFEAUG_HPP

#include "safeaug/augment.hpp"
#include "safeaug/config.hpp"
#include "safeaug/depth.hpp"
#include "safeaug/detection.hpp"
#include "safeaug/error.hpp"
#include "safeaug/evalkit.hpp"
#include "safeaug/experiment.hpp"
#include "safeaug/geometry.hpp"
#include "safeaug/image.hpp"
#include "safeaug/io.hpp"
#include "safeaug/kitti.hpp"
#include "safeaug/manifest.hpp"
#include "safeaug/parallel.hpp"
#include "safeaug/resampling.hpp"
#include "safeaug/synthetic.hpp"
#include "safeaug/types.hpp"

#endif  // SAFEAUG_SAFEAUG_HPP
