// SPDX-License-Identifier: Apache-2.0
//
// chansound - wideband channel sounding post-processing and statistics
// Copyright (C) 2026 The chansound Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "chansound/common.hpp"

#include <span>
#include <vector>

namespace chansound
{

// Unnormalized DFTs backed by FFTW. forward: X[k] = sum x[n] e^{-j2pi kn/N},
// backward: x[n] = sum X[k] e^{+j2pi kn/N}. Safe to call from several threads.
std::vector<cplx> fft_forward(std::span<const cplx> x);
std::vector<cplx> fft_backward(std::span<const cplx> x);

// Centered ("fftshifted") ordering helpers. Element i of a centered array of
// length L sits at integer frequency offset i - L/2 (integer division).
inline long centered_offset(std::size_t i, std::size_t L)
{
    return static_cast<long>(i) - static_cast<long>(L / 2);
}

std::vector<cplx> centered_to_fft_order(std::span<const cplx> centered);
std::vector<cplx> fft_to_centered_order(std::span<const cplx> fft_ordered);

} // namespace chansound
