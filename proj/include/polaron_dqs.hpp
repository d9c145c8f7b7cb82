// Copyright 2026 The polaron-dqs Authors
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

#include "polaron_dqs/builders.hpp"
#include "polaron_dqs/chebyshev.hpp"
#include "polaron_dqs/circuit.hpp"
#include "polaron_dqs/fock.hpp"
#include "polaron_dqs/grid_reference.hpp"
#include "polaron_dqs/harness.hpp"
#include "polaron_dqs/lanczos.hpp"
#include "polaron_dqs/layout.hpp"
#include "polaron_dqs/model.hpp"
#include "polaron_dqs/pauli.hpp"
#include "polaron_dqs/sparse.hpp"
#include "polaron_dqs/statevector.hpp"
