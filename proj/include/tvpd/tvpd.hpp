/*
 Copyright 2026 The tvpd Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef TVPD_TVPD_HPP_
#define TVPD_TVPD_HPP_

#include "tvpd/core.hpp"
#include "tvpd/problem.hpp"
#include "tvpd/lagrangian.hpp"
#include "tvpd/saddle.hpp"
#include "tvpd/flow.hpp"
#include "tvpd/integrator.hpp"
#include "tvpd/oracle.hpp"
#include "tvpd/library.hpp"
#include "tvpd/csv.hpp"
#include "tvpd/report.hpp"

#endif  // TVPD_TVPD_HPP_
