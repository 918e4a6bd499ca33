"""AdaBoost.M1 with C4.5 trees or stumps, tuned by cross-validation and
benchmarked against Naive Bayes."""

from .bayes import NaiveBayesModel, train_nb
from .bench import BenchReport, RunConfig, emit_report, error_ratio, evaluate_holdout, run_suite
from .boost import BoostEnsemble, BoostParams, boost_train
from .dataset import Attribute, Dataset, DatasetError, load, parse_arff, parse_csv, stratified_folds, stratified_split
from .learners import LearnerSpec, fit_learner
from .select import ParamGrid, TuneResult, cv_error, grid_select
from .tree import DecisionTreeModel, TreeParams, grow_tree, train_stump, train_tree

__version__ = "0.1.0"

__all__ = [
    "Attribute", "BenchReport", "BoostEnsemble", "BoostParams", "Dataset", "DatasetError",
    "DecisionTreeModel", "LearnerSpec", "NaiveBayesModel", "ParamGrid", "RunConfig", "TreeParams",
    "TuneResult", "boost_train", "cv_error", "emit_report", "error_ratio", "evaluate_holdout",
    "fit_learner", "grid_select", "grow_tree", "load", "parse_arff", "parse_csv", "run_suite",
    "stratified_folds", "stratified_split", "train_nb", "train_stump", "train_tree",
]
