#pragma once

// Umbrella header. The SQLite-backed harness (sqlite_exec.hpp), the HTTP
// backend (llm_http.hpp) and the CLI (cli_app.hpp) are opt-in includes since
// they pull in heavier dependencies.

#include "spage/binder.hpp"
#include "spage/demos.hpp"
#include "spage/engine.hpp"
#include "spage/errors.hpp"
#include "spage/evalkit.hpp"
#include "spage/expr.hpp"
#include "spage/expr_parser.hpp"
#include "spage/llm.hpp"
#include "spage/metrics.hpp"
#include "spage/plan.hpp"
#include "spage/plan_graph.hpp"
#include "spage/plan_json.hpp"
#include "spage/prompts.hpp"
#include "spage/sql_emit.hpp"
#include "spage/table.hpp"
#include "spage/table_io.hpp"
#include "spage/taskfile.hpp"
#include "spage/validator.hpp"
#include "spage/value.hpp"
