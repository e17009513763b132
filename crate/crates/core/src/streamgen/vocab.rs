//! IRIs of the generated data.

pub const NS: &str = "http://dscep.example/ns#";
pub const RES: &str = "http://dscep.example/res/";
/// Alias IRIs live under `~alias/`; `~` sorts after every letter, so the
/// canonical IRI of a sameAs pair is always the lexically smaller one.
pub const ALIAS: &str = "http://dscep.example/res/~alias/";

macro_rules! ns {
    ($($name:ident = $local:literal;)*) => {
        $(pub const $name: &str = concat!("http://dscep.example/ns#", $local);)*
        /// `(local name, IRI)` for every vocabulary term.
        pub const ALL: &[(&str, &str)] = &[$(($local, $name)),*];
    };
}

ns! {
    TWEET = "Tweet";
    CREATED_AT = "createdAt";
    AUTHOR = "author";
    LANG = "lang";
    MENTIONS = "mentions";
    HAS_ANNOTATION = "hasEntityAnnotation";
    MATCHED_URI = "hasMatchedURI";
    DETECTED_AS = "detectedAs";
    CONFIDENCE = "hasConfidence";
    START = "annotationStart";
    END = "annotationEnd";
    HASHTAG = "hasHashtag";
    SENTIMENT_POS = "hasSentimentPos";
    SENTIMENT_NEG = "hasSentimentNeg";
    LIKES = "likes";
    SHARES = "shares";
    MUSICAL_ARTIST = "MusicalArtist";
    TELEVISION_SHOW = "TelevisionShow";
    ORGANISATION = "Organisation";
    CITY = "City";
    COUNTRY_CLASS = "Country";
    BIRTH_PLACE = "birthPlace";
    COUNTRY = "country";
    COUNTRY_CODE = "countryCode";
    POSITIVE = "Positive";
    NEGATIVE = "Negative";
    INDICATOR = "indicator";
    NOISE = "noise";
}
