// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "matgal/bessel_oracle.hpp"
#include "matgal/distributions.hpp"
#include "matgal/error.hpp"
#include "matgal/gaussian_core.hpp"
#include "matgal/io.hpp"
#include "matgal/kron_linalg.hpp"
#include "matgal/special_fn.hpp"
#include "matgal/validation.hpp"
