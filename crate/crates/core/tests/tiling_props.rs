mod common;

use common::*;
use proptest::prelude::*;

proptest! {
    #[test]
    fn parallelise_partitions_the_parent((parent, sub, count) in partition_case()) {
        check_partition(&parent, &sub, count)?;
    }

    #[test]
    fn linearise_is_a_column_major_bijection((ext, order) in extents_case()) {
        check_linearise(&ext, &order)?;
    }

    #[test]
    fn translations_compose((t, u, v) in translate_case()) {
        check_translate(&t, &u, &v)?;
    }

    #[test]
    fn projection_is_idempotent((t, keep) in project_case()) {
        check_project(&t, &keep)?;
    }
}
