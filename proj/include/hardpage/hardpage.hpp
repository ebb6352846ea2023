#pragma once

// Umbrella header: the whole engine in dependency order.

#include "hardpage/errors.hpp"
#include "hardpage/ecc.hpp"
#include "hardpage/block_pool.hpp"
#include "hardpage/page.hpp"
#include "hardpage/page_store.hpp"
#include "hardpage/schema.hpp"
#include "hardpage/cache.hpp"
#include "hardpage/table_engine.hpp"
#include "hardpage/query.hpp"
#include "hardpage/fault.hpp"
#include "hardpage/bench.hpp"
