// Copyright 2026 The dfs Authors
// SPDX-License-Identifier: Apache-2.0

pub mod cli;
pub mod error;
pub mod greens;
pub mod liouville;
pub mod propagate;
pub mod quad;
pub mod rates;
pub mod scenario;
pub mod spectral;
