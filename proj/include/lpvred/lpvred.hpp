// Copyright 2026 The lpvred Authors
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


#ifndef LPVRED_LPVRED_HPP
#define LPVRED_LPVRED_HPP

#include "box.hpp"
#include "config.hpp"
#include "core.hpp"
#include "dnn.hpp"
#include "hull.hpp"
#include "io.hpp"
#include "lpv.hpp"
#include "matrices.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "models/analytic_benchmark.hpp"
#include "models/parafoil.hpp"
#include "pca.hpp"
#include "region.hpp"
#include "sim.hpp"

#endif  // LPVRED_LPVRED_HPP
