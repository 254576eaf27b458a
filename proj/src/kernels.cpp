// Copyright 2026 The Authors.
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

#include "ktrade/kernels.hpp"

namespace ktrade
{

std::string to_string(KernelFamily family)
{
    switch (family)
    {
    case KernelFamily::RbfGaussian:
        return "rbf";
    case KernelFamily::Linear:
        return "linear";
    case KernelFamily::OneHotDelta:
        return "one-hot-delta";
    }
    return "unknown";
}

KernelFamily kernel_family_from_string(const std::string& name)
{
    if (name == "rbf" || name == "rbf-gaussian")
    {
        return KernelFamily::RbfGaussian;
    }
    if (name == "linear")
    {
        return KernelFamily::Linear;
    }
    if (name == "one-hot-delta" || name == "delta")
    {
        return KernelFamily::OneHotDelta;
    }
    throw ValidationError("unknown kernel family '" + name + "'");
}

void KernelSpec::validate() const
{
    if (input_dim < 1)
    {
        throw ValidationError("kernel input_dim must be positive, got " + std::to_string(input_dim));
    }
    if (family == KernelFamily::RbfGaussian && !(bandwidth > 0.0 && std::isfinite(bandwidth)))
    {
        throw ValidationError("rbf kernel bandwidth must be positive and finite");
    }
    if (family == KernelFamily::OneHotDelta && input_dim != 1)
    {
        throw ValidationError("one-hot-delta kernel takes a single column of category codes");
    }
}

} // namespace ktrade
