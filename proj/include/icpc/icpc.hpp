// Copyright 2026 The ICPC Authors.
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

#include "icpc/augment.hpp"
#include "icpc/binary_io.hpp"
#include "icpc/data_io.hpp"
#include "icpc/error.hpp"
#include "icpc/inference.hpp"
#include "icpc/model/checkpoint.hpp"
#include "icpc/model/config.hpp"
#include "icpc/model/flops.hpp"
#include "icpc/model/frontend.hpp"
#include "icpc/model/optimizer.hpp"
#include "icpc/model/params.hpp"
#include "icpc/model/train.hpp"
#include "icpc/model/transformer.hpp"
#include "icpc/parallel.hpp"
#include "icpc/positional.hpp"
#include "icpc/run_config.hpp"
#include "icpc/sample.hpp"
#include "icpc/signal.hpp"
#include "icpc/stopwords.hpp"
#include "icpc/tta.hpp"
#include "icpc/version.hpp"
