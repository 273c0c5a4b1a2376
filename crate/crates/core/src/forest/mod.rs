//! CART, random forests and the size-split composite.

mod cart;
mod isarf;
mod model_file;
mod random_forest;
mod size_split;

pub use cart::{best_split, fit_cart, gini_impurity, CartParams, CartTree, Node, Split};
pub use isarf::{fit_isarf, merge_sparse_groups, IsarfModel, IsarfParams, SizeSplitForest, DEFAULT_MIN_GROUP_SIZE};
pub use model_file::{decode_model, encode_model, load_model, save_model, MODEL_MAGIC};
pub use random_forest::{fit_random_forest, ForestParams, RandomForest};
pub use size_split::{fit_size_split_tree, route, SIZE_TREE_DEPTH};
