#include "editfactory/server.hpp"

namespace editfactory::server {

using nlohmann::json;

namespace {

json error_response(const char* description) {
  return {{"description", description},
          {"content", {{"application/json", {{"schema", {{"$ref", "#/components/schemas/Error"}}}}}}}};
}

json build() {
  const json bearer = json::array({{{"bearer", json::array()}}});
  const json task_id_param = {{"name", "id"}, {"in", "path"}, {"required", true}, {"schema", {{"type", "string"}}}};
  json paths;
  paths["/api/health"]["get"] = {{"summary", "Liveness probe"},
                                 {"security", json::array()},
                                 {"responses", {{"200", {{"description", "Server is up"}}}}}};
  paths["/api/spec"]["get"] = {{"summary", "This OpenAPI document"},
                               {"security", json::array()},
                               {"responses", {{"200", {{"description", "OpenAPI 3 document"}}}}}};
  paths["/api/checklist"]["get"] = {
      {"summary", "Annotation checklist (categories and legal severities)"},
      {"security", bearer},
      {"responses", {{"200", {{"description", "Checklist JSON"}}}, {"401", error_response("Missing or unknown token")}}}};
  paths["/api/tasks/next"]["get"] = {
      {"summary", "Claim the next open task of a kind under a lease"},
      {"security", bearer},
      {"parameters",
       json::array({{{"name", "kind"},
                     {"in", "query"},
                     {"required", true},
                     {"schema", {{"type", "string"}, {"enum", {"refine", "preference", "human_eval"}}}}}})},
      {"responses",
       {{"200",
         {{"description", "Claimed task"},
          {"content", {{"application/json", {{"schema", {{"$ref", "#/components/schemas/Task"}}}}}}}}},
        {"204", {{"description", "No open task of this kind"}}},
        {"401", error_response("Missing or unknown token")},
        {"422", error_response("Unknown kind")}}}};
  paths["/api/tasks/{id}/submit"]["post"] = {
      {"summary", "Submit the result for a claimed task"},
      {"security", bearer},
      {"parameters", json::array({task_id_param})},
      {"requestBody",
       {{"required", true},
        {"content",
         {{"application/json",
           {{"schema",
             {{"oneOf",
               json::array({{{"$ref", "#/components/schemas/RefineSubmission"}},
                            {{"$ref", "#/components/schemas/PreferenceSubmission"}},
                            {{"$ref", "#/components/schemas/HumanEvalSubmission"}}})}}}}}}}}},
      {"responses",
       {{"200", {{"description", "Accepted; the task is closed"}}},
        {"400", error_response("Body is not JSON")},
        {"401", error_response("Missing or unknown token")},
        {"403", error_response("Caller does not hold the lease (NotClaimant)")},
        {"404", error_response("Unknown task")},
        {"409", error_response("LeaseExpired, TaskClosed or DuplicateAnnotation")},
        {"422", error_response("Validation failure")}}}};
  paths["/api/pairs/{id}/image"]["get"] = {
      {"summary", "Source or target image bytes; ETag is the content hash"},
      {"security", bearer},
      {"parameters",
       json::array({{{"name", "id"}, {"in", "path"}, {"required", true}, {"schema", {{"type", "string"}}}},
                    {{"name", "which"},
                     {"in", "query"},
                     {"schema", {{"type", "string"}, {"enum", {"source", "target"}}, {"default", "source"}}}},
                    {{"name", "If-None-Match"}, {"in", "header"}, {"schema", {{"type", "string"}}}}})},
      {"responses",
       {{"200", {{"description", "Image bytes"}}},
        {"304", {{"description", "Not modified"}}},
        {"404", error_response("Unknown pair")}}}};
  paths["/api/reports/{kind}"]["get"] = {
      {"summary", "Objective or human evaluation report"},
      {"security", bearer},
      {"parameters",
       json::array({{{"name", "kind"},
                     {"in", "path"},
                     {"required", true},
                     {"schema", {{"type", "string"}, {"enum", {"objective", "human"}}}}},
                    {{"name", "dataset"}, {"in", "query"}, {"required", true}, {"schema", {{"type", "string"}}}},
                    {{"name", "format"},
                     {"in", "query"},
                     {"schema", {{"type", "string"}, {"enum", {"json", "md", "csv"}}, {"default", "json"}}}}})},
      {"responses",
       {{"200", {{"description", "Rendered report"}}},
        {"404", error_response("Unknown kind or empty dataset")},
        {"409", error_response("Dataset has unannotated tasks")}}}};

  json schemas;
  schemas["Error"] = {
      {"type", "object"},
      {"properties",
       {{"error",
         {{"type", "object"},
          {"properties", {{"code", {{"type", "string"}}}, {"message", {{"type", "string"}}}}}}}}}};
  schemas["Task"] = {{"type", "object"},
                     {"properties",
                      {{"id", {{"type", "string"}}},
                       {"kind", {{"type", "string"}}},
                       {"pair_id", {{"type", "string"}}},
                       {"dataset", {{"type", "string"}}},
                       {"payload", {{"type", "object"}}},
                       {"lease_expires_at", {{"type", "string"}, {"format", "date-time"}}},
                       {"images", {{"type", "object"}}}}}};
  schemas["RefineSubmission"] = {
      {"type", "object"},
      {"required", {"text", "objectives"}},
      {"properties",
       {{"text", {{"type", "string"}}},
        {"objectives",
         {{"type", "object"},
          {"required", {"semantic_accuracy", "spatial_clarity", "fine_grained_detail"}},
          {"properties",
           {{"semantic_accuracy", {{"type", "boolean"}}},
            {"spatial_clarity", {{"type", "boolean"}}},
            {"fine_grained_detail", {{"type", "boolean"}}}}}}}}}};
  schemas["PreferenceSubmission"] = {
      {"type", "object"},
      {"required", {"failure_modes"}},
      {"properties",
       {{"failure_modes",
         {{"type", "array"},
          {"minItems", 1},
          {"items",
           {{"type", "string"}, {"enum", {"orientation_inconsistency", "viewpoint_ambiguity", "lack_of_detail"}}}}}},
        {"chosen", {{"type", "string"}}},
        {"note", {{"type", "string"}}}}}};
  schemas["HumanEvalSubmission"] = {
      {"type", "object"},
      {"required", {"outcome"}},
      {"properties",
       {{"outcome", {{"type", "string"}, {"enum", {"correct", "defect"}}}},
        {"attest_no_p0", {{"type", "boolean"}}},
        {"defects",
         {{"type", "array"},
          {"items",
           {{"type", "object"},
            {"required", {"severity", "category_id"}},
            {"properties",
             {{"severity", {{"type", "string"}, {"enum", {"P0", "P1", "P2"}}}},
              {"category_id", {{"type", "integer"}, {"minimum", 1}, {"maximum", 8}}},
              {"note", {{"type", "string"}}}}}}}}}}}};

  return {{"openapi", "3.0.3"},
          {"info", {{"title", "editfactory annotation API"}, {"version", "1.0.0"}}},
          {"components",
           {{"securitySchemes", {{"bearer", {{"type", "http"}, {"scheme", "bearer"}}}}}, {"schemas", schemas}}},
          {"security", bearer},
          {"paths", paths}};
}

}  // namespace

const json& openapi_document() {
  static const json doc = build();
  return doc;
}

}  // namespace editfactory::server
