// Copyright 2026 The gmmfad Authors
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

#include "gmmfad/ecm.hpp"

namespace gmmfad::aecm {

/// One AECM sweep of the classical double-EM baseline (common q).
///
/// Cycle 1 updates weights and means from the supplied responsibilities.
/// Cycle 2 recomputes responsibilities under the updated weights/means and
/// takes one EM step of the factor model with the latent factors as missing
/// data:
///   beta   = (I + L^T Psi^{-1} L)^{-1} L^T Psi^{-1}
///   L_new  = S beta^T (beta S beta^T + I - beta L)^{-1}
///   Psi_new = diag(S - L_new beta S)
/// where S is the dense weighted scatter matrix of the component.
MixtureModel aecm_step(const DataMatrix& data, const Responsibilities& resp, int q,
                       const MixtureModel& current, const profile::Box& box = {});

/// Multistart fit with the AECM baseline. Requires a common q; throws
/// DimensionTooLarge when p exceeds config.aecm_p_limit unless config.force.
FitReport fit_baseline_aecm(const DataMatrix& data, const FitConfig& config);

/// AECM from a given starting model, no multistart.
FitReport fit_from(const DataMatrix& data, const MixtureModel& init, const FitConfig& config);

}  // namespace gmmfad::aecm
