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

#include "chansound/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <utility>

namespace chansound
{

namespace
{

// Only plan creation needs the lock; fftw_execute_dft is re-entrant.
class PlanCache
{
  public:
    ~PlanCache()
    {
        for (auto &[key, plan] : plans_)
            fftw_destroy_plan(plan);
    }

    fftw_plan get(std::size_t n, int sign)
    {
        std::lock_guard<std::mutex> lock(mutex_);
        const auto key = std::make_pair(n, sign);
        if (auto it = plans_.find(key); it != plans_.end())
            return it->second;
        auto *in = fftw_alloc_complex(n);
        auto *out = fftw_alloc_complex(n);
        fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), in, out, sign, FFTW_ESTIMATE);
        fftw_free(in);
        fftw_free(out);
        plans_.emplace(key, plan);
        return plan;
    }

  private:
    std::mutex mutex_;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache &plan_cache()
{
    static PlanCache cache;
    return cache;
}

std::vector<cplx> execute(std::span<const cplx> x, int sign)
{
    const std::size_t n = x.size();
    if (n == 0)
        return {};
    fftw_plan plan = plan_cache().get(n, sign);
    auto *in = fftw_alloc_complex(n);
    auto *out = fftw_alloc_complex(n);
    std::copy(x.begin(), x.end(), reinterpret_cast<cplx *>(in));
    fftw_execute_dft(plan, in, out);
    std::vector<cplx> result(reinterpret_cast<cplx *>(out), reinterpret_cast<cplx *>(out) + n);
    fftw_free(in);
    fftw_free(out);
    return result;
}

} // namespace

std::vector<cplx> fft_forward(std::span<const cplx> x)
{
    return execute(x, FFTW_FORWARD);
}

std::vector<cplx> fft_backward(std::span<const cplx> x)
{
    return execute(x, FFTW_BACKWARD);
}

std::vector<cplx> centered_to_fft_order(std::span<const cplx> centered)
{
    const std::size_t L = centered.size();
    std::vector<cplx> out(L);
    for (std::size_t i = 0; i < L; ++i)
    {
        const long o = centered_offset(i, L);
        out[static_cast<std::size_t>((o % static_cast<long>(L) + static_cast<long>(L)) % static_cast<long>(L))] =
            centered[i];
    }
    return out;
}

std::vector<cplx> fft_to_centered_order(std::span<const cplx> fft_ordered)
{
    const std::size_t L = fft_ordered.size();
    std::vector<cplx> out(L);
    for (std::size_t i = 0; i < L; ++i)
    {
        const long o = centered_offset(i, L);
        out[i] = fft_ordered[static_cast<std::size_t>((o % static_cast<long>(L) + static_cast<long>(L)) %
                                                      static_cast<long>(L))];
    }
    return out;
}

} // namespace chansound
