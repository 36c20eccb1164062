/*
 * Copyright 2026 The Nuclei Curation Authors.
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

// HTTP/1.1 front end of ReviewService.
//
//   GET  /api/queue/{round}/next?rater=ID      ReviewItem, or 204 when empty
//   POST /api/ratings                          201 / 409 duplicate / 422
//   POST /api/corrections/{patch_id}           201 / 412 / 422 (RLE body)
//   GET  /api/patches/{patch_id}/image         PNG
//   GET  /api/patches/{patch_id}/masks/{model} 16-bit PNG, or RLE JSON when
//                                              Accept asks for JSON
//   GET  /api/stats                            analytics snapshot
//   GET  /api/manifest?strategy=...            NDJSON enrichment manifest
//
// Raters with a configured token must send it in X-Rater-Token.

#ifndef NUCLEI_CURATION_REVIEW_SERVER_H_
#define NUCLEI_CURATION_REVIEW_SERVER_H_

#include <memory>
#include <string>

#include "nuclei_curation/error.h"
#include "nuclei_curation/review.h"

namespace nuclei_curation {

int HttpStatusFor(ErrorKind kind);

class ReviewHttpServer {
 public:
  explicit ReviewHttpServer(ReviewService& service);
  ~ReviewHttpServer();

  ReviewHttpServer(const ReviewHttpServer&) = delete;
  ReviewHttpServer& operator=(const ReviewHttpServer&) = delete;

  // Port 0 picks a free port. Returns the bound port.
  int Bind(const std::string& host, int port);
  // Blocks until Stop().
  void Listen();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// "host:port", "host" or ":port".
void ParseListenAddress(const std::string& address, std::string& host,
                        int& port);

}  // namespace nuclei_curation

#endif  // NUCLEI_CURATION_REVIEW_SERVER_H_
