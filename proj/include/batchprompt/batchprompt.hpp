#pragma once

// Batched zero-shot classification: disjoint partitioning, shared-scaffold
// prompt rendering, chat-completion dispatch with a deterministic mock twin,
// index-keyed output parsing with rule-based repair, and per-instance
// time/token accounting with accuracy / macro-F1 evaluation.

#include "batchprompt/config.hpp"
#include "batchprompt/cost.hpp"
#include "batchprompt/dataset.hpp"
#include "batchprompt/errors.hpp"
#include "batchprompt/eval.hpp"
#include "batchprompt/mock.hpp"
#include "batchprompt/parse.hpp"
#include "batchprompt/partition.hpp"
#include "batchprompt/provider.hpp"
#include "batchprompt/render.hpp"
#include "batchprompt/run.hpp"
#include "batchprompt/serde.hpp"
#include "batchprompt/strings.hpp"
#include "batchprompt/task.hpp"
#include "batchprompt/version.hpp"
