// Copyright 2026 The kljnsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kljn/random.h"

namespace kljn {

static_assert(DeriveSeed(1, 0, Party::kAlice, StreamRole::kGenerator) !=
                  DeriveSeed(1, 0, Party::kBob, StreamRole::kGenerator),
              "party streams must differ");
static_assert(DeriveSeed(1, 0, Party::kAlice, StreamRole::kGenerator) !=
                  DeriveSeed(1, 1, Party::kAlice, StreamRole::kGenerator),
              "exchange streams must differ");

}  // namespace kljn
