//! Small synthetic fixtures shared by unit tests across modules.

use chrono::NaiveDate;

use crate::mapping::{parse_reference, MappingReference};
use crate::taxonomy::{parse_taxonomy, Taxonomy};

pub(crate) const TAX_FIXTURE: &str = "\
VERSION,9.9.9
CAT,ALPHA,Alpha Things
CAT,BETA,Beta Things
CAT,GAMMA,Gamma Things
CAT,DELTA,Delta Things
CAT,EPSILON,Epsilon Things
KA,ONE,First Area,ALPHA
TOPIC,ONE,first-area,1,First Area
TOPIC,ONE,first-area/part-a,2,Part A
TOPIC,ONE,first-area/part-a/detail,3,Detail
TOPIC,ONE,first-area/part-b,2,Part B
KA,THREE,Third Area,ALPHA
TOPIC,THREE,third-area,1,Third Area
TOPIC,THREE,third-area/piece,2,Piece
KA,TWO,Second Area,BETA
TOPIC,TWO,second-area,1,Second Area
TOPIC,TWO,second-area/only-part,2,Only Part
KA,FOUR,Fourth Area,GAMMA
TOPIC,FOUR,fourth-area,1,Fourth Area
TOPIC,FOUR,fourth-area/slice,2,Slice
KA,INTRO,Introduction,-
TOPIC,INTRO,introduction,1,Introduction
TOPIC,INTRO,introduction/basics,2,Basics
";

pub(crate) const REF_FIXTURE: &str = "\
kind,key,ka,topic,depth
concept,intrusion detection,ONE,first-area/part-a,2
concept,packet filtering,ONE,first-area/part-a/detail,3
concept,risk,TWO,second-area/only-part,2
concept,cross cutting,ONE,first-area/part-b,2
concept,cross cutting,TWO,second-area,1
concept,basics,INTRO,introduction/basics,2
credential,CERT-X,ONE,first-area/part-a,2
credential,CERT-X,TWO,second-area/only-part,2
";

pub(crate) fn tax() -> Taxonomy {
    parse_taxonomy("9.9.9", TAX_FIXTURE).unwrap()
}

pub(crate) fn reference() -> MappingReference {
    parse_reference(REF_FIXTURE, &tax()).unwrap()
}

pub(crate) fn date(s: &str) -> NaiveDate {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
}
