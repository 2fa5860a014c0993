// Copyright 2026 The JITAI Bandit Authors
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

// JSON over HTTP front end for Engine. Every handler takes the same mutex, so
// bandit updates and log appends have a single writer.

#include <memory>
#include <mutex>
#include <string>

#include "jitai/service.hpp"

namespace httplib {
class Server;
}

namespace jitai {

class HttpService {
 public:
  explicit HttpService(Engine& engine);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  // Port 0 picks a free port. Returns the bound port or throws IoError.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  void stop();
  bool running() const;

 private:
  void install_routes();

  Engine& engine_;
  std::mutex mutex_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace jitai
