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

#include "nuclei_curation/review_server.h"

#include <functional>

#include "httplib.h"
#include "nuclei_curation/json_io.h"
#include "nuclei_curation/png_io.h"

namespace nuclei_curation {

namespace {

constexpr char kJson[] = "application/json";

void SendError(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(Json{{"error", message}}.dump(), kJson);
}

std::optional<std::string> TokenOf(const httplib::Request& req) {
  if (!req.has_header("X-Rater-Token")) return std::nullopt;
  return req.get_header_value("X-Rater-Token");
}

// Runs a handler, translating library errors into HTTP statuses.
httplib::Server::Handler Guarded(
    std::function<void(const httplib::Request&, httplib::Response&)> handler) {
  return [handler = std::move(handler)](const httplib::Request& req,
                                        httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const Error& e) {
      SendError(res, HttpStatusFor(e.kind()), e.what());
    } catch (const std::invalid_argument& e) {
      SendError(res, 400, e.what());
    } catch (const std::out_of_range& e) {
      SendError(res, 400, e.what());
    } catch (const std::exception& e) {
      SendError(res, 500, e.what());
    }
  };
}

}  // namespace

int HttpStatusFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
      return 422;
    case ErrorKind::kPrecondition:
      return 412;
    case ErrorKind::kNotFound:
      return 404;
    case ErrorKind::kDuplicate:
      return 409;
    case ErrorKind::kPermission:
      return 403;
    case ErrorKind::kIo:
      return 500;
  }
  return 500;
}

void ParseListenAddress(const std::string& address, std::string& host,
                        int& port) {
  const std::size_t colon = address.rfind(':');
  if (colon == std::string::npos) {
    host = address;
    return;
  }
  if (colon > 0) host = address.substr(0, colon);
  try {
    port = std::stoi(address.substr(colon + 1));
  } catch (const std::exception&) {
    throw Error(ErrorKind::kInvalidArgument, "review",
                "bad listen address '" + address + "'");
  }
  if (port < 0 || port > 65535) {
    throw Error(ErrorKind::kInvalidArgument, "review",
                "port out of range in '" + address + "'");
  }
}

struct ReviewHttpServer::Impl {
  explicit Impl(ReviewService& s) : service(s) {}
  ReviewService& service;
  httplib::Server server;
};

ReviewHttpServer::ReviewHttpServer(ReviewService& service)
    : impl_(std::make_unique<Impl>(service)) {
  ReviewService& svc = impl_->service;
  httplib::Server& server = impl_->server;

  server.Get(R"(/api/queue/(\d+)/next)",
             Guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               const int round = std::stoi(req.matches[1]);
               const std::string rater = req.get_param_value("rater");
               if (rater.empty()) {
                 SendError(res, 400, "missing ?rater= parameter");
                 return;
               }
               svc.Authenticate(rater, TokenOf(req));
               const std::optional<ReviewItem> item = svc.NextItem(rater, round);
               if (!item) {
                 res.status = 204;
                 return;
               }
               res.set_content(ToJson(*item).dump(), kJson);
             }));

  server.Post("/api/ratings",
              Guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                const RatingRecord record =
                    RatingRecordFromJson(ParseJson(req.body, "rating body"));
                svc.Authenticate(record.rater_id, TokenOf(req));
                const SubmitResult result = svc.SubmitRating(record);
                res.status = 201;
                Json body = ToJson(result.item);
                body["escalated"] = result.escalated;
                res.set_content(body.dump(), kJson);
              }));

  server.Post(R"(/api/corrections/([^/]+))",
              Guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                const std::string patch = req.matches[1];
                const RleDocument doc =
                    RleDocumentFromJson(ParseJson(req.body, "correction body"));
                svc.SubmitCorrection(patch, doc);
                res.status = 201;
                res.set_content(Json{{"patch_id", patch}, {"status", "corrected"}}.dump(),
                                kJson);
              }));

  server.Get(R"(/api/patches/([^/]+)/image)",
             Guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               const std::string patch = req.matches[1];
               const auto it = svc.catalog().images.find(patch);
               if (it == svc.catalog().images.end()) {
                 SendError(res, 404, "no image for patch " + patch);
                 return;
               }
               const std::vector<std::uint8_t> bytes = ReadFileBytes(it->second);
               res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
             }));

  server.Get(R"(/api/patches/([^/]+)/masks/([^/]+))",
             Guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               const std::string patch = req.matches[1];
               const std::string model = req.matches[2];
               std::optional<InstanceMask> mask;
               if (model == "corrected") {
                 mask = svc.Correction(patch);
               } else if (const auto p = svc.catalog().masks.find(patch);
                          p != svc.catalog().masks.end()) {
                 if (const auto m = p->second.find(model); m != p->second.end()) {
                   mask = ReadMaskFile(m->second);
                 }
               }
               if (!mask) {
                 SendError(res, 404, "no mask for patch " + patch + ", model " + model);
                 return;
               }
               const std::string accept = req.get_header_value("Accept");
               if (accept.find("json") != std::string::npos) {
                 res.set_content(ToJson(EncodeRle(*mask)).dump(), kJson);
               } else {
                 const std::vector<std::uint8_t> png = EncodeLabelMapPng(*mask);
                 res.set_content(std::string(png.begin(), png.end()), "image/png");
               }
             }));

  server.Get("/api/stats",
             Guarded([&svc](const httplib::Request&, httplib::Response& res) {
               res.set_content(svc.StatsText(), kJson);
             }));

  server.Get("/api/manifest",
             Guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               const std::string strategy = req.has_param("strategy")
                                                ? req.get_param_value("strategy")
                                                : "combined";
               SamplingConfig sampling;
               if (req.has_param("gamma")) {
                 sampling.gamma_s = std::stod(req.get_param_value("gamma"));
               }
               if (req.has_param("seed")) {
                 sampling.seed = std::stoull(req.get_param_value("seed"));
               }
               res.set_content(
                   ManifestToNdjson(svc.BuildEnrichment(ParseStrategy(strategy), sampling)),
                   "application/x-ndjson");
             }));
}

ReviewHttpServer::~ReviewHttpServer() = default;

int ReviewHttpServer::Bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) {
      throw Error(ErrorKind::kIo, "review", "cannot bind " + host);
    }
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorKind::kIo, "review",
                "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void ReviewHttpServer::Listen() { impl_->server.listen_after_bind(); }

void ReviewHttpServer::Stop() { impl_->server.stop(); }

}  // namespace nuclei_curation
