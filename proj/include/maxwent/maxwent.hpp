/*
 * Copyright 2026 The maxwent authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MAXWENT_MAXWENT_HPP_
#define MAXWENT_MAXWENT_HPP_

#include "maxwent/checkpoint.hpp"
#include "maxwent/common.hpp"
#include "maxwent/data.hpp"
#include "maxwent/evaluation.hpp"
#include "maxwent/io.hpp"
#include "maxwent/matrix.hpp"
#include "maxwent/network.hpp"
#include "maxwent/oracle.hpp"
#include "maxwent/random.hpp"
#include "maxwent/report.hpp"
#include "maxwent/stochastic.hpp"
#include "maxwent/trainer.hpp"

#endif  // MAXWENT_MAXWENT_HPP_
