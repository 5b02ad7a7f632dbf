/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 the usdpc authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef USDPC_USDPC_HPP
#define USDPC_USDPC_HPP

#include "usdpc/analytic.hpp"
#include "usdpc/beamform.hpp"
#include "usdpc/config.hpp"
#include "usdpc/core.hpp"
#include "usdpc/dataset.hpp"
#include "usdpc/dpc.hpp"
#include "usdpc/errors.hpp"
#include "usdpc/frame.hpp"
#include "usdpc/grid2d.hpp"
#include "usdpc/io.hpp"
#include "usdpc/memory_effect.hpp"
#include "usdpc/phantom.hpp"
#include "usdpc/simulate.hpp"
#include "usdpc/sos_analysis.hpp"
#include "usdpc/version.hpp"

#endif /* USDPC_USDPC_HPP */
