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

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace chansound
{

using cplx = std::complex<double>;

inline constexpr double speed_of_light = 299792458.0; // m/s
inline constexpr double pi = 3.14159265358979323846;

inline double to_db(double linear) { return 10.0 * std::log10(linear); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

// Error categories. The CLI maps them onto exit codes 2, 3 and 4.
class ConfigError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

class FitError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

} // namespace chansound
